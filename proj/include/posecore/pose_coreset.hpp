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

// Exact pose coresets.
//
// A PoseCoreset is a weighted subset of marker pairs whose optimal rotation
// equals the optimal rotation of the full pair (P, Q), and keeps doing so
// after P and Q are independently rotated and translated. Construction runs
// in one pass over the markers with memory that depends only on d.
//
// The coreset carries, besides the weights, two sets of affine anchor
// weights (one for P, one for Q) over its own rows. They reproduce the full
// centroids from the coreset rows alone, which is what keeps the estimate
// exact when the observed set is translated. With collinear P (rank one) the
// r(d - 1) + 1 = d rows cannot affinely reach a generic Q centroid; see
// PoseCoresetOptions::balance_rank_one.

#ifndef POSECORE_POSE_CORESET_HPP
#define POSECORE_POSE_CORESET_HPP

#include "posecore/caratheodory.hpp"
#include "posecore/geometry.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace posecore {

struct RankInfo {
  Index rank = 0;
  /// d x d orthogonal; rows of P * basis vanish beyond column `rank`.
  Matrix basis;
  Vector singular_values;
};

/// Number of singular values of P that are >= tol * (largest one).
/// Throws kRankDeficient when P is identically zero.
RankInfo numerical_rank(const PointSet& p, double tol = kDefaultTol);

/// Entries of U^T p q^T V restricted to the first `rank` rows with the
/// diagonal removed, row-major; length rank * (d - 1).
Vector reduced_vector(const Vector& p, const Vector& q, const SvdFactors& factors, Index rank);

struct PoseCoresetOptions {
  double rank_tol = kDefaultTol;
  /// Scale the weights to a distribution. Rotations are unaffected.
  bool normalize = false;
  /// Exchange pivots after the reduction: among supports reachable by
  /// swapping one marker, move to the one whose rotation is least sensitive
  /// to noise on Q. Every visited support is an exact coreset of the same
  /// size bound. Skipped when rank * (d - 1) exceeds refine_max_reduced_dim.
  bool refine = true;
  Index refine_pool = 512;
  int refine_rounds = 16;
  Index refine_max_reduced_dim = 32;
  /// Collinear P only: also balance the coreset around the P centroid. This
  /// makes the rotation exact under translations of Q at the price of one
  /// marker over the r(d - 1) + 1 bound. Without it a rank-one coreset is
  /// within the bound but only approximately translation invariant.
  bool balance_rank_one = false;
};

class PoseCoreset {
 public:
  const WeightedIndexSet& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const SvdFactors& factors() const noexcept { return factors_; }
  Index rank() const noexcept { return rank_; }
  Index dim() const noexcept { return basis_.rows(); }
  Index reduced_dim() const noexcept { return rank_ * (dim() - 1); }
  Index source_size() const noexcept { return source_size_; }
  const Matrix& basis() const noexcept { return basis_; }
  const Vector& p_centroid() const noexcept { return p_centroid_; }
  const Vector& q_centroid() const noexcept { return q_centroid_; }
  /// Affine weights (summing to one) over the coreset rows that rebuild the
  /// full-set centroids.
  const Vector& p_anchor() const noexcept { return p_anchor_; }
  const Vector& q_anchor() const noexcept { return q_anchor_; }
  /// False when a centroid is not an affine combination of the coreset rows;
  /// translation invariance is then only approximate.
  bool anchors_exact() const noexcept { return anchors_exact_; }

  std::string to_json() const;
  static PoseCoreset from_json(std::string_view text);

 private:
  friend PoseCoreset pose_coreset(const PointSet&, const PointSet&, const PoseCoresetOptions&);

  WeightedIndexSet weights_;
  SvdFactors factors_;
  Index rank_ = 0;
  Index source_size_ = 0;
  Matrix basis_;
  Vector p_centroid_;
  Vector q_centroid_;
  Vector p_anchor_;
  Vector q_anchor_;
  bool anchors_exact_ = false;
};

PoseCoreset pose_coreset(const PointSet& p, const PointSet& q,
                         const PoseCoresetOptions& options = {});

struct WeightedPairs {
  /// Rows sqrt(w_i) p_i and sqrt(w_i) q_i.
  PointSet p_scaled;
  PointSet q_scaled;
  /// Unscaled rows with their weights, for the weighted-Kabsch form.
  PointSet p_rows;
  PointSet q_rows;
  std::vector<double> weights;
};

/// Throws kOutOfRange if the coreset refers to rows that p or q lack.
WeightedPairs extract_weighted_pairs(const PoseCoreset& c, const PointSet& p, const PointSet& q);

/// Optimal motion of (p, q) computed from the coreset rows only. p and q are
/// full-size sets, typically rigid transforms of the ones the coreset was
/// built from.
RigidMotion coreset_pose(const PoseCoreset& c, const PointSet& p, const PointSet& q);

/// Same, with the coreset rows already gathered in index order.
RigidMotion coreset_pose_from_rows(const PoseCoreset& c, const PointSet& p_rows,
                                   const PointSet& q_rows);

/// cost(PA + mu, QB + nu, R~) - OPT(PA + mu, QB + nu), translations optimal,
/// where R~ comes from the coreset applied to the transformed pair.
double validate_coreset(const PoseCoreset& c, const PointSet& p, const PointSet& q,
                        const Rotation& a, const Rotation& b, const Vector& mu,
                        const Vector& nu);

/// Largest entry of U^T (sum_i w_i p_i q_i^T) V (centered rows) that should
/// vanish: off-diagonals of the first `rank` rows and everything below them.
/// Relative to the largest singular value.
double diagonal_defect(const PoseCoreset& c, const PointSet& p, const PointSet& q);

}  // namespace posecore

#endif  // POSECORE_POSE_CORESET_HPP
