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

#include "posecore/caratheodory.hpp"

#include "posecore/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace posecore {

namespace {

// Below this the weight of a normalized distribution is treated as zero.
constexpr double kWeightFloor = 1e-12;
// Above this dimension the left null vector comes from a pivoted QR instead
// of a full SVD; both return a unit vector orthogonal to the column space.
constexpr Index kSvdMaxDim = 24;

Vector left_null_vector(const Matrix& a) {
  const Index m = a.rows();
  if (a.cols() <= kSvdMaxDim) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
    return svd.matrixU().col(m - 1);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  Vector e = Vector::Unit(m, m - 1);
  return qr.householderQ() * e;
}

// Drops entry k (a point sitting on the weighted mean) and rescales the rest,
// which leaves both the weighted sum and the total weight unchanged.
void drop_mean_point(Eigen::Ref<Vector> w, Index k, double total) {
  const double rest = total - w(k);
  w(k) = 0.0;
  if (rest > 0.0) w *= total / rest;
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedIndexSet

WeightedIndexSet::WeightedIndexSet(const std::map<Index, double>& entries) {
  for (const auto& [i, w] : entries) {
    if (!std::isfinite(w) || w < 0.0)
      fail(ErrorCode::kContractViolation, "weights must be finite and nonnegative");
    if (i < 0) fail(ErrorCode::kOutOfRange, "negative index");
    if (w > 0.0) {
      indices_.push_back(i);
      weights_.push_back(w);
    }
  }
}

double WeightedIndexSet::total_weight() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

WeightedIndexSet WeightedIndexSet::normalized() const {
  WeightedIndexSet out = *this;
  const double total = total_weight();
  if (total > 0.0)
    for (double& w : out.weights_) w /= total;
  return out;
}

WeightedVectors WeightedVectors::from(Matrix points, Vector weights) {
  std::vector<Index> idx(static_cast<std::size_t>(points.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  return {std::move(points), std::move(weights), std::move(idx)};
}

// ---------------------------------------------------------------------------
// Pivot step

namespace detail {

int caratheodory_pivot(const Eigen::Ref<const Matrix>& b, Eigen::Ref<Vector> weights) {
  const Index k = b.rows();
  const Index dim = b.cols();
  if (k != dim + 2 || weights.size() != k)
    fail(ErrorCode::kShapeMismatch, "pivot expects dim + 2 weighted vectors");

  const double total = weights.sum();
  if (!(total > 0.0)) fail(ErrorCode::kDegenerateWeights, "pivot weights sum to zero");
  const Vector t = weights / total;

  const Vector mean = b.transpose() * t;
  const Matrix u = b.rowwise() - mean.transpose();
  const Vector norms = u.rowwise().norm();

  double scale = 0.0;
  for (Index i = 0; i < k; ++i) scale = std::max(scale, b.row(i).norm());
  const double zero_tol = 1e-12 * std::max(scale, std::numeric_limits<double>::min());

  if (norms.maxCoeff() < zero_tol) {
    // All vectors coincide: any k - 1 of them carry the same sum.
    drop_mean_point(weights, k - 1, total);
    return 1;
  }
  for (Index i = 0; i < k; ++i) {
    if (norms(i) < zero_tol) {
      drop_mean_point(weights, i, total);
      return 1;
    }
  }

  // Unit directions v_i and the convex weights z_i with sum_i z_i v_i = 0.
  const Matrix v = u.array().colwise() / norms.array();
  Vector z = t.cwiseProduct(norms);
  z /= z.sum();

  // h with sum_i h_i = 0 and sum_i h_i v_i = 0, from the left null space of
  // the difference rows v_i - v_1 (i >= 2).
  const Matrix diffs = v.bottomRows(k - 1).rowwise() - v.row(0);
  Vector h(k);
  h.tail(k - 1) = left_null_vector(diffs);
  h(0) = -h.tail(k - 1).sum();

  Index pivot = -1;
  double alpha = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < k; ++i) {
    if (h(i) > 0.0) {
      const double ratio = z(i) / h(i);
      if (ratio < alpha) {
        alpha = ratio;
        pivot = i;
      }
    }
  }
  if (pivot < 0) fail(ErrorCode::kInternal, "affine dependence has no positive entry");

  Vector tp = z - alpha * h;
  tp(pivot) = 0.0;

  Vector nt(k);
  for (Index i = 0; i < k; ++i) nt(i) = std::max(tp(i), 0.0) / norms(i);
  double nt_sum = nt.sum();
  nt /= nt_sum;

  int zeros = 0;
  for (Index i = 0; i < k; ++i) {
    if (nt(i) < kWeightFloor) {
      nt(i) = 0.0;
      ++zeros;
    }
  }
  nt_sum = nt.sum();
  weights = nt * (total / nt_sum);
  return zeros;
}

}  // namespace detail

Vector sum_coreset(const Matrix& b) {
  if (b.cols() < 1 || b.rows() != b.cols() + 2)
    fail(ErrorCode::kShapeMismatch, "sum_coreset expects d' + 2 vectors in R^d'");
  if (!b.allFinite()) fail(ErrorCode::kInvalidArgument, "non-finite input vector");
  Vector t = Vector::Constant(b.rows(), 1.0 / static_cast<double>(b.rows()));
  detail::caratheodory_pivot(b, t);
  return t / t.sum();
}

WeightedVectors caratheodory_reduce(const WeightedVectors& s) {
  const Index m = s.size();
  const Index dim = s.dim();
  if (dim < 1) fail(ErrorCode::kShapeMismatch, "vectors must have dimension >= 1");
  if (s.weights.size() != m || static_cast<Index>(s.indices.size()) != m)
    fail(ErrorCode::kShapeMismatch, "weights/indices length differs from vector count");
  if (!s.points.allFinite()) fail(ErrorCode::kInvalidArgument, "non-finite input vector");
  for (Index i = 0; i < m; ++i)
    if (!(s.weights(i) >= 0.0) || !std::isfinite(s.weights(i)))
      fail(ErrorCode::kContractViolation, "negative or non-finite weight");
  const double total = s.weights.sum();
  if (!(total > 0.0)) fail(ErrorCode::kDegenerateWeights, "total weight is zero");
  if (m <= dim + 1) return s;

  Vector w = s.weights / total;
  const Index k = dim + 2;
  std::vector<Index> live;
  live.reserve(static_cast<std::size_t>(m));
  Matrix sub(k, dim);
  Vector sw(k);
  while (true) {
    live.clear();
    for (Index i = 0; i < m; ++i)
      if (w(i) > 0.0) live.push_back(i);
    if (static_cast<Index>(live.size()) <= dim + 1) break;
    for (Index j = 0; j < k; ++j) {
      sub.row(j) = s.points.row(live[j]);
      sw(j) = w(live[j]);
    }
    detail::caratheodory_pivot(sub, sw);
    for (Index j = 0; j < k; ++j) w(live[j]) = sw(j);
  }

  WeightedVectors out;
  out.points.resize(static_cast<Index>(live.size()), dim);
  out.weights.resize(static_cast<Index>(live.size()));
  for (std::size_t j = 0; j < live.size(); ++j) {
    out.points.row(static_cast<Index>(j)) = s.points.row(live[j]);
    out.weights(static_cast<Index>(j)) = w(live[j]) * total;
    out.indices.push_back(s.indices[static_cast<std::size_t>(live[j])]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// StreamingReducer

StreamingReducer::StreamingReducer(Index dim)
    : dim_(dim), buffer_(dim + 2, dim), weights_(dim + 2), indices_(static_cast<std::size_t>(dim + 2)) {
  if (dim < 1) fail(ErrorCode::kInvalidArgument, "reducer dimension must be >= 1");
}

void StreamingReducer::insert(Index index, const Eigen::Ref<const Vector>& x, double weight) {
  if (x.size() != dim_) fail(ErrorCode::kShapeMismatch, "inserted vector has wrong dimension");
  if (!x.allFinite()) fail(ErrorCode::kInvalidArgument, "inserted vector is not finite");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    fail(ErrorCode::kContractViolation, "negative or non-finite weight");
  ++inserted_;
  if (weight == 0.0) return;
  const Index slot = static_cast<Index>(size_);
  buffer_.row(slot) = x.transpose();
  weights_(slot) = weight;
  indices_[size_] = index;
  ++size_;
  if (static_cast<Index>(size_) == dim_ + 2) compress();
}

void StreamingReducer::compress() {
  detail::caratheodory_pivot(buffer_, weights_);
  ++compressions_;
  std::size_t keep = 0;
  for (std::size_t i = 0; i < size_; ++i) {
    const Index src = static_cast<Index>(i);
    if (weights_(src) > 0.0) {
      if (keep != i) {
        buffer_.row(static_cast<Index>(keep)) = buffer_.row(src);
        weights_(static_cast<Index>(keep)) = weights_(src);
        indices_[keep] = indices_[i];
      }
      ++keep;
    }
  }
  size_ = keep;
}

void StreamingReducer::merge(const StreamingReducer& other) {
  if (other.dim_ != dim_) fail(ErrorCode::kShapeMismatch, "reducers differ in dimension");
  const std::size_t before = inserted_;
  for (std::size_t i = 0; i < other.size_; ++i) {
    const Index row = static_cast<Index>(i);
    insert(other.indices_[i], other.buffer_.row(row).transpose(), other.weights_(row));
  }
  inserted_ = before + other.inserted_;
}

Vector StreamingReducer::weighted_sum() const {
  const Index m = static_cast<Index>(size_);
  return buffer_.topRows(m).transpose() * weights_.head(m);
}

double StreamingReducer::total_weight() const {
  return weights_.head(static_cast<Index>(size_)).sum();
}

WeightedIndexSet StreamingReducer::finalize() const {
  if (inserted_ == 0) fail(ErrorCode::kEmptyInput, "reducer has no insertions");
  std::map<Index, double> entries;
  for (std::size_t i = 0; i < size_; ++i) entries[indices_[i]] += weights_(static_cast<Index>(i));
  return WeightedIndexSet(entries);
}

StreamingReducer reducer_merge(const StreamingReducer& a, const StreamingReducer& b) {
  StreamingReducer out = a;
  out.merge(b);
  return out;
}

}  // namespace posecore
