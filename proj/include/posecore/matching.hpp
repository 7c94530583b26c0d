// Copyright 2026 The PoseCore Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Correspondence search between a source marker set and an observed set:
// nearest-neighbour matching, optimal assignment under a known rotation,
// exhaustive permutation search, and ICP. Every routine accepts a coreset as
// its source (with optional weights), which is where the savings come from.

#ifndef POSECORE_MATCHING_HPP
#define POSECORE_MATCHING_HPP

#include "posecore/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace posecore {

struct Correspondence {
  /// mapping[i] = row of the target matched to source row i.
  std::vector<Index> mapping;
  bool injective = false;

  static Correspondence identity(Index n);
  std::string to_json() const;
  static Correspondence from_json(const std::string& text, Index target_size);
};

/// Nearest target row for every source row; ties go to the smaller index.
Correspondence nn_match(const PointSet& source, const PointSet& target);

struct Assignment {
  Correspondence correspondence;
  double cost = 0.0;
};

/// Injective map minimizing sum_i |p_i - (R q_map(i) + t)|^2.
/// Requires |p| <= |q|. O(|p|^2 |q|).
Assignment assignment_match(const PointSet& p, const PointSet& q, const RigidMotion& motion);
Assignment assignment_match(const PointSet& p, const PointSet& q, const Rotation& r);

/// n! as an exact integer (n <= 20).
std::uint64_t permutation_count(Index n);

struct ExhaustiveMatch {
  Correspondence correspondence;
  RigidMotion motion;
  double cost = 0.0;
  std::uint64_t permutations_evaluated = 0;
};

inline constexpr Index kExhaustiveMaxSize = 9;

/// Scans every permutation of q, solving the pose for each, and returns the
/// global optimum. Refuses inputs larger than `max_size`.
ExhaustiveMatch exhaustive_match(const PointSet& p, const PointSet& q, Weights w = {},
                                 Index max_size = kExhaustiveMaxSize);

struct IcpOptions {
  int max_iter = 100;
  /// Stop once the cost decreases by less than this.
  double tol = 1e-10;
};

struct IcpResult {
  RigidMotion motion;
  Correspondence correspondence;
  int iterations = 0;
  bool converged = false;
  /// Cost after the initial fit and after every iteration; nonincreasing.
  std::vector<double> costs;
  std::uint64_t seed = 0;

  double final_cost() const { return costs.empty() ? 0.0 : costs.back(); }
};

IcpResult icp(const PointSet& source, const PointSet& target, const Correspondence& init,
              const IcpOptions& options = {}, Weights w = {});

/// Injective random source->target map (a random permutation prefix).
Correspondence random_correspondence(Index source_size, Index target_size, std::uint64_t seed);

/// ICP from a random correspondence drawn from `seed`.
IcpResult icp_random(const PointSet& source, const PointSet& target, std::uint64_t seed,
                     const IcpOptions& options = {}, Weights w = {});

/// Best of `restarts` random-start runs. Restart k uses seed
/// restart_seed(seed, k), so the result does not depend on `workers`.
IcpResult icp_restarts(const PointSet& source, const PointSet& target, int restarts,
                       std::uint64_t seed, const IcpOptions& options = {}, Weights w = {},
                       int workers = 1);

std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t k);

}  // namespace posecore

#endif  // POSECORE_MATCHING_HPP
