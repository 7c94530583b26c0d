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

#include "posecore/pose_coreset.hpp"

#include "posecore/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace posecore {

namespace {

using nlohmann::json;

Matrix centered(const PointSet& p, const Vector& c) { return p.rows().rowwise() - c.transpose(); }

// Orthonormal completion of the columns of `a` (d x k, orthonormal) to d x d.
Matrix complete_basis(const Matrix& a, Index d) {
  if (a.cols() == 0) return Matrix::Identity(d, d);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  q.leftCols(a.cols()) = a;
  return q;
}

// U from the SVD of the cross-covariance, with its trailing columns chosen so
// that the last d - rank of them are orthogonal to the row space of P. When
// the cross-covariance has full rank `rank` this already holds; otherwise the
// null-singular-value columns of U are free and get re-picked.
Matrix rank_aligned_u(const SvdFactors& f, const Matrix& basis, Index rank, double tol) {
  const Index d = f.U.rows();
  const double top = f.D(0);
  Index s = 0;
  while (s < d && top > 0.0 && std::abs(f.D(s)) > tol * top) ++s;
  if (s >= rank) return f.U;

  const Matrix us = f.U.leftCols(s);
  const Matrix b = basis.leftCols(rank);
  const Matrix rest = b - us * (us.transpose() * b);
  Eigen::JacobiSVD<Matrix> svd(rest, Eigen::ComputeThinU);
  Matrix head(d, rank);
  head.leftCols(s) = us;
  head.rightCols(rank - s) = svd.matrixU().leftCols(rank - s);
  return complete_basis(head, d);
}

// Min-norm affine weights beta over the rows of `rows` (k x d, already
// centered at the target) with sum(beta) = 1 and rows^T beta = 0.
Vector affine_anchor(const Matrix& rows, bool& exact, double scale) {
  const Index k = rows.rows();
  const Index d = rows.cols();
  Matrix a(d + 1, k);
  a.topRows(d) = rows.transpose();
  a.row(d).setOnes();
  Vector rhs = Vector::Zero(d + 1);
  rhs(d) = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  cod.setThreshold(1e-12);
  Vector beta = cod.solve(rhs);
  const double res = (rows.transpose() * beta).norm();
  const double sum_err = std::abs(beta.sum() - 1.0);
  exact = exact && res <= 1e-9 * std::max(scale, 1e-300) && sum_err <= 1e-9;
  return beta;
}

// Rows of the Caratheodory input: off-diagonal entries of the first `rank`
// rows of (U^T p_i)(V^T q_i)^T, plus, when `balance` is set, the P offset
// along the first axis (scaled to the same units).
struct Embedding {
  const Matrix& a;
  const Matrix& b;
  Index rank;
  bool balance;
  double unit;

  Index dim() const { return rank * (a.cols() - 1) + (balance ? 1 : 0); }
  Vector at(Index i) const {
    const Index d = a.cols();
    Vector m(dim());
    Index k = 0;
    for (Index r = 0; r < rank; ++r)
      for (Index j = 0; j < d; ++j)
        if (j != r) m(k++) = a(i, r) * b(i, j);
    if (balance) m(k) = a(i, 0) * unit;
    return m;
  }
};

// First-order variance (up to sigma^2) of the rotation estimated from the
// weighted rows `idx`, with a = P_c U and b = Q_c V, under iid noise on the Q
// rows. Infinite when the rows cannot carry the pose.
double noise_sensitivity(const Matrix& a, const Matrix& b, const std::vector<Index>& idx,
                         const Vector& w, Index rank, Index live, bool balance, double pscale,
                         double qscale, double* violation) {
  *violation = std::numeric_limits<double>::infinity();
  const Index k = static_cast<Index>(idx.size());
  const Index d = a.cols();
  Matrix as(k, d), bs(k, d);
  for (Index j = 0; j < k; ++j) {
    as.row(j) = a.row(idx[static_cast<std::size_t>(j)]);
    bs.row(j) = b.row(idx[static_cast<std::size_t>(j)]);
  }
  bool exact = true;
  const Vector bp = affine_anchor(as, exact, pscale);
  bool q_exact = true;
  const Vector bq = affine_anchor(bs, q_exact, qscale);
  if (!exact || !(q_exact || balance)) return std::numeric_limits<double>::infinity();
  as.rowwise() -= (as.transpose() * bp).transpose();
  bs.rowwise() -= (bs.transpose() * bq).transpose();

  const Vector g = as.transpose() * w;
  const Matrix coef = w.asDiagonal() * as - bq * g.transpose();
  const Vector diag = (as.cwiseProduct(bs)).transpose() * w;
  // Entries that are nonzero in the full diagonal must keep their sign here,
  // or the weighted Kabsch flips the corresponding axis. Only the last one
  // may be negative, and then only while it is the smallest in magnitude.
  const double floor = 1e-9 * diag.head(rank).cwiseAbs().maxCoeff();
  const double norm = w.sum() * pscale * qscale;
  const Index head = std::min(rank, live);
  *violation = 0.0;
  for (Index j = 0; j < std::min(live, d - 1); ++j)
    if (!(diag(j) > floor)) *violation += (floor - diag(j)) / norm;
  double score = 0.0;
  const Vector col = coef.colwise().squaredNorm().transpose();
  for (Index j = 0; j < head; ++j)
    for (Index l = j + 1; l < d; ++l) {
      const double dl = l < live ? diag(l) : std::max(diag(l), 0.0);
      const double s = diag(j) + dl;
      if (!(s > floor)) {
        *violation += (floor - s) / norm;
        continue;
      }
      score += (col(j) + col(l)) / (s * s);
    }
  if (*violation > 0.0) return std::numeric_limits<double>::infinity();
  return score;
}

struct Vertex {
  std::vector<Index> idx;
  Vector w;
  double score = std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();

  bool better(const Vertex& o, double margin) const {
    if (violation != o.violation) return violation < o.violation * (1.0 - margin);
    return score < o.score * (1.0 - margin);
  }
};

// Exchange pivots on the polytope {w >= 0 : sum_i w_i m_i = 0}: bring one
// marker j into the support, move along the null direction that gives j
// positive weight until some support weight hits zero, and keep the best
// scoring swap. Stops when no swap improves the score.
// With `improve` false the walk stops at the first vertex with a finite score.
Vertex refine_vertex(Vertex v, const Embedding& e, Index live, bool improve,
                     const PoseCoresetOptions& options, double pscale, double qscale) {
  const Matrix& a = e.a;
  const Matrix& b = e.b;
  const Index rank = e.rank;
  const Index n = a.rows();

  std::vector<Index> pool;
  const Index size = std::min(n, std::max<Index>(options.refine_pool, 1));
  for (Index t = 0; t < size; ++t) pool.push_back(size == n ? t : t * n / size);

  v.score = noise_sensitivity(a, b, v.idx, v.w, rank, live, e.balance, pscale, qscale,
                              &v.violation);
  const int rounds = improve ? options.refine_rounds : std::max(options.refine_rounds, 64);
  for (int round = 0; round < rounds; ++round) {
    if (!improve && std::isfinite(v.score)) break;
    const Index k = static_cast<Index>(v.idx.size());
    Matrix ms(e.dim(), k);
    for (Index j = 0; j < k; ++j) ms.col(j) = e.at(v.idx[static_cast<std::size_t>(j)]);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ms);
    const double mscale = std::max(ms.cwiseAbs().maxCoeff(), 1e-300);

    Vertex best;
    for (Index j : pool) {
      if (std::binary_search(v.idx.begin(), v.idx.end(), j)) continue;
      const Vector mj = e.at(j);
      const Vector x = cod.solve(-mj);
      if ((ms * x + mj).norm() > 1e-9 * (mscale + mj.norm())) continue;
      double alpha = std::numeric_limits<double>::infinity();
      Index out = -1;
      for (Index t = 0; t < k; ++t)
        if (x(t) < 0.0 && v.w(t) / -x(t) < alpha) {
          alpha = v.w(t) / -x(t);
          out = t;
        }
      if (out < 0 || !(alpha > 0.0)) continue;

      Vertex cand;
      std::vector<std::pair<Index, double>> entries;
      for (Index t = 0; t < k; ++t)
        if (t != out) entries.emplace_back(v.idx[static_cast<std::size_t>(t)], v.w(t) + alpha * x(t));
      entries.emplace_back(j, alpha);
      std::sort(entries.begin(), entries.end());
      cand.w.resize(k);
      bool positive = true;
      for (Index t = 0; t < k; ++t) {
        cand.idx.push_back(entries[static_cast<std::size_t>(t)].first);
        cand.w(t) = entries[static_cast<std::size_t>(t)].second;
        positive = positive && cand.w(t) > 0.0;
      }
      if (!positive) continue;
      cand.score =
          noise_sensitivity(a, b, cand.idx, cand.w, rank, live, e.balance, pscale,
                                       qscale, &cand.violation);
      if (cand.better(best, 0.0)) best = std::move(cand);
    }
    if (!best.better(v, 1e-6)) break;
    v = std::move(best);
  }
  return v;
}

// Projection of `w` onto the numerical null space of the support's
// m-vectors, scaled to `total`; empty when that loses positivity.
Vector support_weights(const Embedding& e, const std::vector<Index>& idx, const Vector& w0,
                       double total) {
  const Index k = static_cast<Index>(idx.size());
  Matrix ms(e.dim(), k);
  for (Index t = 0; t < k; ++t) ms.col(t) = e.at(idx[static_cast<std::size_t>(t)]);
  Eigen::JacobiSVD<Matrix> svd(ms, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const double tol = 1e-10 * (sv.size() ? sv(0) : 0.0);
  Index live = 0;
  while (live < sv.size() && sv(live) > tol) ++live;
  if (live == k) return {};
  const Matrix null = svd.matrixV().rightCols(k - live);
  Vector w = null * (null.transpose() * w0);
  if (!(w.minCoeff() > 0.0)) return {};
  return w * (total / w.sum());
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix json_matrix(const json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    fail(ErrorCode::kParse, "matrix field has wrong row count");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      fail(ErrorCode::kParse, "matrix field has wrong column count");
    for (Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Vector json_vector(const json& j, Index size) {
  if (!j.is_array() || static_cast<Index>(j.size()) != size)
    fail(ErrorCode::kParse, "vector field has wrong length");
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

RankInfo numerical_rank(const PointSet& p, double tol) {
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(p.rows(),
                                                                          Eigen::ComputeFullV);
  RankInfo info;
  info.singular_values = svd.singularValues();
  info.basis = svd.matrixV();
  const double top = info.singular_values.size() ? info.singular_values(0) : 0.0;
  if (!(top > 0.0)) fail(ErrorCode::kRankDeficient, "point set is identically zero");
  for (Index i = 0; i < info.singular_values.size(); ++i)
    if (info.singular_values(i) >= tol * top) ++info.rank;
  if (info.basis.determinant() < 0.0) info.basis.col(info.basis.cols() - 1) *= -1.0;
  return info;
}

Vector reduced_vector(const Vector& p, const Vector& q, const SvdFactors& f, Index rank) {
  const Index d = f.U.rows();
  if (p.size() != d || q.size() != d) fail(ErrorCode::kShapeMismatch, "vector dimension mismatch");
  if (rank < 1 || rank > d) fail(ErrorCode::kInvalidArgument, "rank out of range");
  const Vector a = f.U.transpose() * p;
  const Vector b = f.V.transpose() * q;
  Vector out(rank * (d - 1));
  Index k = 0;
  for (Index i = 0; i < rank; ++i)
    for (Index j = 0; j < d; ++j)
      if (j != i) out(k++) = a(i) * b(j);
  return out;
}

PoseCoreset pose_coreset(const PointSet& p, const PointSet& q, const PoseCoresetOptions& options) {
  if (p.size() != q.size() || p.dim() != q.dim())
    fail(ErrorCode::kShapeMismatch, "point sets differ in shape");
  const Index n = p.size();
  const Index d = p.dim();

  PoseCoreset c;
  c.source_size_ = n;
  c.p_centroid_ = centroid(p);
  c.q_centroid_ = centroid(q);
  const Matrix pc = centered(p, c.p_centroid_);
  const Matrix qc = centered(q, c.q_centroid_);

  // Throws kRankDeficient when every marker sits on the centroid.
  RankInfo info = numerical_rank(PointSet(pc), options.rank_tol);
  const Index rank = info.rank;
  c.rank_ = rank;
  c.basis_ = std::move(info.basis);

  SvdFactors f = svd_factors(pc.transpose() * qc);
  f.U = rank_aligned_u(f, c.basis_, rank, options.rank_tol);
  if (f.U.determinant() * f.V.determinant() < 0.0) {
    f.V.col(d - 1) *= -1.0;
    f.D(d - 1) *= -1.0;
  }
  c.factors_ = f;

  const double pscale = pc.cwiseAbs().maxCoeff();
  const double qscale = std::max(qc.cwiseAbs().maxCoeff(), pscale * 1e-300);
  const Matrix a = pc * f.U;
  const Matrix b = qc * f.V;
  const Embedding e{a, b, rank, rank == 1 && options.balance_rank_one && d > 1, qscale};
  StreamingReducer reducer(e.dim());
  for (Index i = 0; i < n; ++i) reducer.insert(i, e.at(i));
  c.weights_ = reducer.finalize();

  Index live = 0;
  while (live < rank && std::abs(f.D(live)) > options.rank_tol * f.D(0)) ++live;
  if (static_cast<std::size_t>(n) > c.weights_.size()) {
    Vertex v;
    v.idx.assign(c.weights_.indices().begin(), c.weights_.indices().end());
    v.w = Eigen::Map<const Vector>(c.weights_.weights().data(), static_cast<Index>(v.idx.size()));
    const std::vector<Index> before = v.idx;
    const bool improve = options.refine && e.dim() <= options.refine_max_reduced_dim;
    v = refine_vertex(std::move(v), e, live, improve, options, pscale, qscale);
    if (v.idx != before) {
      const Vector w = support_weights(e, v.idx, v.w, c.weights_.total_weight());
      if (w.size() > 0) {
        std::map<Index, double> entries;
        for (std::size_t t = 0; t < v.idx.size(); ++t) entries[v.idx[t]] = w(static_cast<Index>(t));
        c.weights_ = WeightedIndexSet(entries);
      }
    }
  }
  if (options.normalize) c.weights_ = c.weights_.normalized();

  const auto idx = c.weights_.indices();
  const Index k = static_cast<Index>(idx.size());
  Matrix prow(k, d), qrow(k, d);
  for (Index j = 0; j < k; ++j) {
    prow.row(j) = pc.row(idx[static_cast<std::size_t>(j)]);
    qrow.row(j) = qc.row(idx[static_cast<std::size_t>(j)]);
  }
  bool exact = true;
  c.p_anchor_ = affine_anchor(prow, exact, pscale);
  c.q_anchor_ = affine_anchor(qrow, exact, qscale);
  c.anchors_exact_ = exact;
  return c;
}

WeightedPairs extract_weighted_pairs(const PoseCoreset& c, const PointSet& p, const PointSet& q) {
  if (p.dim() != c.dim() || q.dim() != c.dim())
    fail(ErrorCode::kShapeMismatch, "point dimension differs from the coreset's");
  const auto idx = c.weights().indices();
  for (Index i : idx)
    if (i >= p.size() || i >= q.size())
      fail(ErrorCode::kOutOfRange, "coreset refers to a row beyond the point set (stale coreset?)");
  PointSet prows = p.select(idx);
  PointSet qrows = q.select(idx);
  const auto w = c.weights().weights();
  Matrix ps = prows.rows();
  Matrix qs = qrows.rows();
  for (Index j = 0; j < ps.rows(); ++j) {
    const double s = std::sqrt(w[static_cast<std::size_t>(j)]);
    ps.row(j) *= s;
    qs.row(j) *= s;
  }
  return {PointSet(std::move(ps)), PointSet(std::move(qs)), std::move(prows), std::move(qrows),
          std::vector<double>(w.begin(), w.end())};
}

RigidMotion coreset_pose_from_rows(const PoseCoreset& c, const PointSet& p_rows,
                                   const PointSet& q_rows) {
  const Index k = static_cast<Index>(c.size());
  if (p_rows.size() != k || q_rows.size() != k || p_rows.dim() != c.dim() ||
      q_rows.dim() != c.dim())
    fail(ErrorCode::kShapeMismatch, "coreset rows have the wrong shape");
  const Vector pbar = p_rows.rows().transpose() * c.p_anchor();
  const Vector qbar = q_rows.rows().transpose() * c.q_anchor();
  const auto w = c.weights().weights();
  const Eigen::Map<const Vector> wv(w.data(), k);
  const Matrix pc = p_rows.rows().rowwise() - pbar.transpose();
  const Matrix qc = q_rows.rows().rowwise() - qbar.transpose();
  Rotation r = kabsch(pc.transpose() * wv.asDiagonal() * qc).rotation;
  Vector t = pbar - r.matrix() * qbar;
  return {std::move(r), std::move(t)};
}

RigidMotion coreset_pose(const PoseCoreset& c, const PointSet& p, const PointSet& q) {
  if (p.dim() != c.dim() || q.dim() != c.dim())
    fail(ErrorCode::kShapeMismatch, "point dimension differs from the coreset's");
  const auto idx = c.weights().indices();
  return coreset_pose_from_rows(c, p.select(idx), q.select(idx));
}

double validate_coreset(const PoseCoreset& c, const PointSet& p, const PointSet& q,
                        const Rotation& a, const Rotation& b, const Vector& mu, const Vector& nu) {
  const PointSet pt = transform_rows(p, a, mu);
  const PointSet qt = transform_rows(q, b, nu);
  const RigidMotion m = coreset_pose(c, pt, qt);
  return cost_with_optimal_translation(pt, qt, m.rotation) - optimal_cost(pt, qt);
}

double diagonal_defect(const PoseCoreset& c, const PointSet& p, const PointSet& q) {
  const auto idx = c.weights().indices();
  const auto w = c.weights().weights();
  const Index d = c.dim();
  Matrix h = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const Vector pi = p.row(idx[j]) - c.p_centroid();
    const Vector qi = q.row(idx[j]) - c.q_centroid();
    h += w[j] * pi * qi.transpose();
  }
  const Matrix e = c.factors().U.transpose() * h * c.factors().V;
  double worst = 0.0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i >= c.rank() || i != j) worst = std::max(worst, std::abs(e(i, j)));
  const double top = c.factors().D(0);
  return top > 0.0 ? worst / top : worst;
}

// ---------------------------------------------------------------------------
// JSON

std::string PoseCoreset::to_json() const {
  json j;
  j["indices"] = std::vector<Index>(weights_.indices().begin(), weights_.indices().end());
  j["weights"] = std::vector<double>(weights_.weights().begin(), weights_.weights().end());
  j["rank"] = rank_;
  j["d"] = dim();
  j["n"] = source_size_;
  j["reduced_dim"] = reduced_dim();
  j["basis"] = matrix_json(basis_);
  j["U"] = matrix_json(factors_.U);
  j["D"] = vector_json(factors_.D);
  j["V"] = matrix_json(factors_.V);
  j["p_centroid"] = vector_json(p_centroid_);
  j["q_centroid"] = vector_json(q_centroid_);
  j["p_anchor"] = vector_json(p_anchor_);
  j["q_anchor"] = vector_json(q_anchor_);
  j["anchors_exact"] = anchors_exact_;
  return j.dump();
}

PoseCoreset PoseCoreset::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("invalid coreset JSON: ") + e.what());
  }
  try {
    PoseCoreset c;
    const Index d = j.at("d").get<Index>();
    if (d < 2) fail(ErrorCode::kParse, "coreset dimension must be >= 2");
    c.rank_ = j.at("rank").get<Index>();
    if (c.rank_ < 1 || c.rank_ > d) fail(ErrorCode::kParse, "coreset rank out of range");
    c.source_size_ = j.at("n").get<Index>();
    const auto indices = j.at("indices").get<std::vector<Index>>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (indices.size() != weights.size()) fail(ErrorCode::kParse, "indices/weights length differ");
    std::map<Index, double> entries;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (!(weights[i] > 0.0)) fail(ErrorCode::kParse, "coreset weights must be positive");
      if (!entries.emplace(indices[i], weights[i]).second)
        fail(ErrorCode::kParse, "duplicate coreset index");
    }
    c.weights_ = WeightedIndexSet(entries);
    const Index k = static_cast<Index>(c.weights_.size());
    c.basis_ = json_matrix(j.at("basis"), d, d);
    c.factors_.U = json_matrix(j.at("U"), d, d);
    c.factors_.D = json_vector(j.at("D"), d);
    c.factors_.V = json_matrix(j.at("V"), d, d);
    c.p_centroid_ = json_vector(j.at("p_centroid"), d);
    c.q_centroid_ = json_vector(j.at("q_centroid"), d);
    c.p_anchor_ = json_vector(j.at("p_anchor"), k);
    c.q_anchor_ = json_vector(j.at("q_anchor"), k);
    c.anchors_exact_ = j.at("anchors_exact").get<bool>();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed coreset JSON: ") + e.what());
  }
}

}  // namespace posecore
