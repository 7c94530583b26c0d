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

#include "posecore/matching.hpp"

#include "posecore/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <exception>
#include <optional>
#include <thread>

namespace posecore {

namespace {

bool is_injective(const std::vector<Index>& mapping, Index target_size) {
  std::vector<char> seen(static_cast<std::size_t>(target_size), 0);
  for (Index j : mapping) {
    if (seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = 1;
  }
  return true;
}

PointSet gather(const PointSet& q, const std::vector<Index>& mapping) {
  return q.select(mapping);
}

}  // namespace

Correspondence Correspondence::identity(Index n) {
  Correspondence c;
  c.mapping.resize(static_cast<std::size_t>(n));
  std::iota(c.mapping.begin(), c.mapping.end(), Index{0});
  c.injective = true;
  return c;
}

std::string Correspondence::to_json() const { return nlohmann::json(mapping).dump(); }

Correspondence Correspondence::from_json(const std::string& text, Index target_size) {
  Correspondence c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_array()) fail(ErrorCode::kParse, "correspondence must be a JSON array");
    for (const auto& e : j)
      if (!e.is_number_integer()) fail(ErrorCode::kParse, "correspondence entries must be integers");
    c.mapping = j.get<std::vector<Index>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("invalid correspondence JSON: ") + e.what());
  }
  for (Index j : c.mapping)
    if (j < 0 || j >= target_size) fail(ErrorCode::kOutOfRange, "correspondence index out of range");
  c.injective = is_injective(c.mapping, target_size);
  return c;
}

Correspondence nn_match(const PointSet& source, const PointSet& target) {
  if (source.dim() != target.dim()) fail(ErrorCode::kShapeMismatch, "dimension mismatch");
  Correspondence c;
  c.mapping.resize(static_cast<std::size_t>(source.size()));
  const Matrix& s = source.rows();
  const Matrix& q = target.rows();
  for (Index i = 0; i < s.rows(); ++i) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < q.rows(); ++j) {
      const double dist = (q.row(j) - s.row(i)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    c.mapping[static_cast<std::size_t>(i)] = best;
  }
  c.injective = is_injective(c.mapping, target.size());
  return c;
}

// ---------------------------------------------------------------------------
// Assignment (Hungarian method with row/column potentials)

Assignment assignment_match(const PointSet& p, const PointSet& q, const RigidMotion& motion) {
  if (p.dim() != q.dim()) fail(ErrorCode::kShapeMismatch, "dimension mismatch");
  const Index rows = p.size();
  const Index cols = q.size();
  if (rows > cols) fail(ErrorCode::kInvalidArgument, "assignment needs |P| <= |Q|");

  const PointSet moved = apply_motion(q, motion);
  Matrix cost(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      cost(i, j) = (p.rows().row(i) - moved.rows().row(j)).squaredNorm();

  // 1-based arrays; column 0 is the virtual start column.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<Index> match(cols + 1, 0), way(cols + 1, 0);
  for (Index i = 1; i <= rows; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.correspondence.mapping.assign(static_cast<std::size_t>(rows), 0);
  for (Index j = 1; j <= cols; ++j)
    if (match[j] != 0) out.correspondence.mapping[static_cast<std::size_t>(match[j] - 1)] = j - 1;
  out.correspondence.injective = true;
  for (Index i = 0; i < rows; ++i)
    out.cost += cost(i, out.correspondence.mapping[static_cast<std::size_t>(i)]);
  return out;
}

Assignment assignment_match(const PointSet& p, const PointSet& q, const Rotation& r) {
  return assignment_match(p, q, RigidMotion{r, Vector::Zero(p.dim())});
}

// ---------------------------------------------------------------------------
// Exhaustive search

std::uint64_t permutation_count(Index n) {
  if (n < 0 || n > 20) fail(ErrorCode::kInvalidArgument, "n! overflows 64 bits beyond n = 20");
  std::uint64_t f = 1;
  for (Index k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

ExhaustiveMatch exhaustive_match(const PointSet& p, const PointSet& q, Weights w, Index max_size) {
  if (p.size() != q.size() || p.dim() != q.dim())
    fail(ErrorCode::kShapeMismatch, "exhaustive matching needs equal-size sets");
  const Index n = p.size();
  if (n > max_size)
    fail(ErrorCode::kInvalidArgument,
         "exhaustive matching refused: " + std::to_string(n) + "! permutations exceeds the guard of " +
             std::to_string(max_size) + " points");
  const Index d = p.dim();

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  ExhaustiveMatch best{Correspondence::identity(n), RigidMotion::identity(d),
                       std::numeric_limits<double>::infinity(), 0};

  if (w.empty()) {
    // Unweighted centroids do not depend on the permutation, so each step is
    // one d x d cross-covariance and one small SVD.
    const Vector cp = centroid(p);
    const Vector cq = centroid(q);
    const Matrix pc = p.rows().rowwise() - cp.transpose();
    const Matrix qc = q.rows().rowwise() - cq.transpose();
    const double base = pc.squaredNorm() + qc.squaredNorm();
    Matrix h(d, d);
    do {
      h.setZero();
      for (Index i = 0; i < n; ++i)
        h.noalias() += pc.row(i).transpose() * qc.row(perm[static_cast<std::size_t>(i)]);
      const KabschResult k = kabsch(h);
      const double c = std::max(0.0, base - 2.0 * (k.rotation.matrix().cwiseProduct(h)).sum());
      ++best.permutations_evaluated;
      if (c < best.cost) {
        best.cost = c;
        best.correspondence.mapping = perm;
        best.motion = RigidMotion{k.rotation, cp - k.rotation.matrix() * cq};
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    do {
      const PointSet qp = gather(q, perm);
      const RigidMotion m = estimate_pose(p, qp, w);
      const double c = cost(p, qp, m, w);
      ++best.permutations_evaluated;
      if (c < best.cost) {
        best.cost = c;
        best.correspondence.mapping = perm;
        best.motion = m;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  best.correspondence.injective = true;
  return best;
}

// ---------------------------------------------------------------------------
// ICP

IcpResult icp(const PointSet& source, const PointSet& target, const Correspondence& init,
              const IcpOptions& options, Weights w) {
  if (source.dim() != target.dim()) fail(ErrorCode::kShapeMismatch, "dimension mismatch");
  if (static_cast<Index>(init.mapping.size()) != source.size())
    fail(ErrorCode::kShapeMismatch, "initial correspondence has the wrong length");
  for (Index j : init.mapping)
    if (j < 0 || j >= target.size()) fail(ErrorCode::kOutOfRange, "correspondence index out of range");

  IcpResult out{RigidMotion::identity(source.dim()), init, 0, false, {}, 0};
  PointSet matched = gather(target, out.correspondence.mapping);
  out.motion = estimate_pose(source, matched, w);
  out.costs.push_back(cost(source, matched, out.motion, w));

  for (int it = 1; it <= options.max_iter; ++it) {
    Correspondence next = nn_match(source, apply_motion(target, out.motion));
    const bool unchanged = next.mapping == out.correspondence.mapping;
    matched = gather(target, next.mapping);
    RigidMotion motion = estimate_pose(source, matched, w);
    const double c = cost(source, matched, motion, w);
    const double prev = out.costs.back();
    out.iterations = it;
    out.costs.push_back(c);
    out.correspondence = std::move(next);
    out.motion = std::move(motion);
    if (unchanged || prev - c < options.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over (seed, k).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Correspondence random_correspondence(Index source_size, Index target_size, std::uint64_t seed) {
  if (target_size < 1) fail(ErrorCode::kEmptyInput, "empty target set");
  std::mt19937_64 rng(seed);
  Correspondence c;
  if (source_size <= target_size) {
    std::vector<Index> perm(static_cast<std::size_t>(target_size));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    c.mapping.assign(perm.begin(), perm.begin() + source_size);
    c.injective = true;
  } else {
    std::uniform_int_distribution<Index> pick(0, target_size - 1);
    for (Index i = 0; i < source_size; ++i) c.mapping.push_back(pick(rng));
    c.injective = is_injective(c.mapping, target_size);
  }
  return c;
}

IcpResult icp_random(const PointSet& source, const PointSet& target, std::uint64_t seed,
                     const IcpOptions& options, Weights w) {
  IcpResult r = icp(source, target, random_correspondence(source.size(), target.size(), seed),
                    options, w);
  r.seed = seed;
  return r;
}

IcpResult icp_restarts(const PointSet& source, const PointSet& target, int restarts,
                       std::uint64_t seed, const IcpOptions& options, Weights w, int workers) {
  if (restarts < 1) fail(ErrorCode::kInvalidArgument, "need at least one restart");
  workers = std::clamp(workers, 1, restarts);
  std::vector<std::optional<IcpResult>> results(static_cast<std::size_t>(restarts));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run = [&](int worker) {
    try {
      for (int k = worker; k < restarts; k += workers)
        results[static_cast<std::size_t>(k)] =
            icp_random(source, target, restart_seed(seed, static_cast<std::uint64_t>(k)), options, w);
    } catch (...) {
      errors[static_cast<std::size_t>(worker)] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(run, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k)
    if (results[k]->final_cost() < results[best]->final_cost()) best = k;
  return std::move(*results[best]);
}

}  // namespace posecore
