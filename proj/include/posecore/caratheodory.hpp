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

// Sum-preserving sparsification of vector sets (Caratheodory reduction).
//
// Every routine here trades a set of m weighted vectors in R^k for a subset
// of at most k + 1 of them, reweighted so that the weighted sum and the total
// weight are unchanged. The single pivot step (one vector dropped per call)
// is the building block for the batch reducer and the one-pass streaming
// reducer.

#ifndef POSECORE_CARATHEODORY_HPP
#define POSECORE_CARATHEODORY_HPP

#include "posecore/geometry.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace posecore {

/// Sparse nonnegative weights over original row indices, sorted by index.
/// Only strictly positive weights are stored.
class WeightedIndexSet {
 public:
  WeightedIndexSet() = default;
  explicit WeightedIndexSet(const std::map<Index, double>& entries);

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::span<const Index> indices() const noexcept { return indices_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double total_weight() const noexcept;

  /// Same support, weights scaled to sum to one.
  WeightedIndexSet normalized() const;

 private:
  std::vector<Index> indices_;
  std::vector<double> weights_;
};

/// m weighted vectors in R^k, one per row of `points`, tagged with the
/// original index they came from.
struct WeightedVectors {
  Matrix points;
  Vector weights;
  std::vector<Index> indices;

  /// Indices default to 0..m-1.
  static WeightedVectors from(Matrix points, Vector weights);
  Index size() const noexcept { return points.rows(); }
  Index dim() const noexcept { return points.cols(); }
  Vector weighted_sum() const { return points.transpose() * weights; }
};

/// Distribution t over the k + 2 rows of `b` (b is (k + 2) x k) with
/// sum_i t_i b_i equal to the mean of the rows and at least one t_i exactly 0.
Vector sum_coreset(const Matrix& b);

/// At most dim + 1 of the input vectors, reweighted so that the weighted sum
/// and total weight are preserved. Inputs with <= dim + 1 vectors are
/// returned unchanged.
WeightedVectors caratheodory_reduce(const WeightedVectors& s);

/// One-pass reducer: keeps at most dim + 1 (index, weight, vector) triples
/// whose weighted sum equals the sum of everything inserted so far.
class StreamingReducer {
 public:
  explicit StreamingReducer(Index dim);

  void insert(Index index, const Eigen::Ref<const Vector>& x, double weight = 1.0);
  /// Inserts every retained triple of `other`.
  void merge(const StreamingReducer& other);
  WeightedIndexSet finalize() const;

  Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  std::size_t inserted() const noexcept { return inserted_; }
  std::size_t compressions() const noexcept { return compressions_; }

  Vector weighted_sum() const;
  double total_weight() const;
  std::span<const Index> indices() const noexcept { return {indices_.data(), size_}; }
  Vector weights() const { return weights_.head(static_cast<Index>(size_)); }
  Matrix vectors() const { return buffer_.topRows(static_cast<Index>(size_)); }

 private:
  void compress();

  Index dim_;
  Matrix buffer_;
  Vector weights_;
  std::vector<Index> indices_;
  std::size_t size_ = 0;
  std::size_t inserted_ = 0;
  std::size_t compressions_ = 0;
};

StreamingReducer reducer_merge(const StreamingReducer& a, const StreamingReducer& b);

namespace detail {

/// Weighted pivot: given exactly dim + 2 rows and strictly positive weights,
/// rewrites `weights` so that at least one entry is exactly zero while
/// sum_i w_i b_i and sum_i w_i are preserved. Returns the number of zeros.
int caratheodory_pivot(const Eigen::Ref<const Matrix>& b, Eigen::Ref<Vector> weights);

}  // namespace detail

}  // namespace posecore

#endif  // POSECORE_CARATHEODORY_HPP
