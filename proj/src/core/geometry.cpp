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

#include "posecore/geometry.hpp"

#include "posecore/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace posecore {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kDegenerateWeights: return "degenerate weights";
    case ErrorCode::kRankDeficient: return "rank deficient";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kOutOfRange: return "index out of range";
    case ErrorCode::kContractViolation: return "numerical contract violation";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void check_same_shape(const PointSet& p, const PointSet& q) {
  if (p.size() != q.size() || p.dim() != q.dim())
    fail(ErrorCode::kShapeMismatch, "point sets differ in shape");
}

void check_weights(Weights w, Index n) {
  if (w.empty()) return;
  if (static_cast<Index>(w.size()) != n)
    fail(ErrorCode::kShapeMismatch, "weight vector length differs from point count");
  double total = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0)
      fail(ErrorCode::kInvalidArgument, "weights must be finite and nonnegative");
    total += x;
  }
  if (!(total > 0.0)) fail(ErrorCode::kDegenerateWeights, "weights sum to zero");
}

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a < -180.0) a += 360.0;
  return std::abs(a);
}

}  // namespace

// ---------------------------------------------------------------------------
// PointSet

PointSet::PointSet(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1) fail(ErrorCode::kEmptyInput, "point set has no rows");
  if (rows_.cols() < 2) fail(ErrorCode::kInvalidArgument, "point dimension must be >= 2");
  if (!rows_.allFinite()) fail(ErrorCode::kInvalidArgument, "point set has non-finite entries");
}

static Matrix matrix_from_lists(std::initializer_list<std::initializer_list<double>> rows) {
  const Index n = static_cast<Index>(rows.size());
  const Index d = n ? static_cast<Index>(rows.begin()->size()) : 0;
  Matrix m(n, d);
  Index i = 0;
  for (const auto& r : rows) {
    if (static_cast<Index>(r.size()) != d)
      fail(ErrorCode::kShapeMismatch, "ragged point rows");
    Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

PointSet::PointSet(std::initializer_list<std::initializer_list<double>> rows)
    : PointSet(matrix_from_lists(rows)) {}

PointSet PointSet::select(std::span<const Index> indices) const {
  Matrix out(static_cast<Index>(indices.size()), dim());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= size()) fail(ErrorCode::kOutOfRange, "row index out of range");
    out.row(static_cast<Index>(k)) = rows_.row(i);
  }
  return PointSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Rotation / RigidMotion

Rotation::Rotation(Matrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 2)
    fail(ErrorCode::kShapeMismatch, "rotation must be square with d >= 2");
  if (!m_.allFinite()) fail(ErrorCode::kInvalidArgument, "rotation has non-finite entries");
  const Index d = m_.rows();
  const double orth = (m_.transpose() * m_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (orth > tol) fail(ErrorCode::kInvalidArgument, "matrix is not orthogonal");
  if (std::abs(m_.determinant() - 1.0) > tol)
    fail(ErrorCode::kInvalidArgument, "rotation determinant is not +1");
}

Rotation Rotation::identity(Index d) { return Rotation(Matrix::Identity(d, d), Unchecked{}); }

Rotation Rotation::transpose() const { return Rotation(m_.transpose(), Unchecked{}); }

Rotation operator*(const Rotation& a, const Rotation& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::kShapeMismatch, "rotation dimensions differ");
  return Rotation(a.m_ * b.m_, Rotation::Unchecked{});
}

RigidMotion RigidMotion::identity(Index d) {
  return {Rotation::identity(d), Vector::Zero(d)};
}

RigidMotion RigidMotion::inverse() const {
  const Rotation rt = rotation.transpose();
  return {rt, -(rt.matrix() * translation)};
}

RigidMotion operator*(const RigidMotion& a, const RigidMotion& b) {
  return {a.rotation * b.rotation, a.rotation.matrix() * b.translation + a.translation};
}

// ---------------------------------------------------------------------------
// SVD and Kabsch

SvdFactors svd_factors(const Matrix& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::kShapeMismatch, "svd_factors expects a square matrix");
  if (!m.allFinite()) fail(ErrorCode::kInvalidArgument, "matrix has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV(), false};
  if (f.U.determinant() * f.V.determinant() < 0.0) {
    // Singular values come out nonincreasing, so the last column pairs with
    // the smallest one. D carries the sign so that U D V^T still equals m.
    f.V.col(f.V.cols() - 1) *= -1.0;
    f.D(f.D.size() - 1) *= -1.0;
    f.sign_corrected = true;
  }
  return f;
}

Matrix cross_covariance(const PointSet& p, const PointSet& q, Weights w) {
  check_same_shape(p, q);
  check_weights(w, p.size());
  if (w.empty()) return p.rows().transpose() * q.rows();
  const Eigen::Map<const Vector> wv(w.data(), static_cast<Index>(w.size()));
  return p.rows().transpose() * wv.asDiagonal() * q.rows();
}

KabschResult kabsch(const Matrix& cross_cov) {
  const Index d = cross_cov.rows();
  SvdFactors f = svd_factors(cross_cov);
  if (cross_cov.cwiseAbs().maxCoeff() == 0.0)
    return {Rotation::identity(d), std::move(f), true};
  Matrix r = f.U * f.V.transpose();
  return {Rotation(std::move(r), 1e-8), std::move(f), false};
}

Vector centroid(const PointSet& p, Weights w) {
  check_weights(w, p.size());
  if (w.empty()) return p.rows().colwise().mean().transpose();
  const Eigen::Map<const Vector> wv(w.data(), static_cast<Index>(w.size()));
  return (p.rows().transpose() * wv) / wv.sum();
}

Rotation kabsch_rotation(const PointSet& p, const PointSet& q, Weights w) {
  return kabsch(cross_covariance(p, q, w)).rotation;
}

RigidMotion estimate_pose(const PointSet& p, const PointSet& q, Weights w) {
  check_same_shape(p, q);
  const Vector cp = centroid(p, w);
  const Vector cq = centroid(q, w);
  const Matrix pc = p.rows().rowwise() - cp.transpose();
  const Matrix qc = q.rows().rowwise() - cq.transpose();
  Matrix h;
  if (w.empty()) {
    h = pc.transpose() * qc;
  } else {
    const Eigen::Map<const Vector> wv(w.data(), static_cast<Index>(w.size()));
    h = pc.transpose() * wv.asDiagonal() * qc;
  }
  Rotation r = kabsch(h).rotation;
  Vector t = cp - r.matrix() * cq;
  return {std::move(r), std::move(t)};
}

double cost(const PointSet& p, const PointSet& q, const Rotation& r, Weights w) {
  return cost(p, q, RigidMotion{r, Vector::Zero(p.dim())}, w);
}

double cost(const PointSet& p, const PointSet& q, const RigidMotion& m, Weights w) {
  check_same_shape(p, q);
  check_weights(w, p.size());
  if (m.rotation.dim() != p.dim() || m.translation.size() != p.dim())
    fail(ErrorCode::kShapeMismatch, "motion dimension differs from point dimension");
  const Matrix moved =
      (q.rows() * m.rotation.matrix().transpose()).rowwise() + m.translation.transpose();
  const Vector sq = (p.rows() - moved).rowwise().squaredNorm();
  if (w.empty()) return sq.sum();
  const Eigen::Map<const Vector> wv(w.data(), static_cast<Index>(w.size()));
  return sq.dot(wv);
}

double cost_with_optimal_translation(const PointSet& p, const PointSet& q,
                                     const Rotation& r, Weights w) {
  const Vector t = centroid(p, w) - r.matrix() * centroid(q, w);
  return cost(p, q, RigidMotion{r, t}, w);
}

double optimal_cost(const PointSet& p, const PointSet& q, Weights w) {
  return cost(p, q, estimate_pose(p, q, w), w);
}

PointSet apply_motion(const PointSet& q, const RigidMotion& m) {
  if (m.rotation.dim() != q.dim() || m.translation.size() != q.dim())
    fail(ErrorCode::kShapeMismatch, "motion dimension differs from point dimension");
  Matrix out = (q.rows() * m.rotation.matrix().transpose()).rowwise() + m.translation.transpose();
  return PointSet(std::move(out));
}

PointSet transform_rows(const PointSet& p, const Rotation& a, const Vector& shift) {
  if (a.dim() != p.dim() || shift.size() != p.dim())
    fail(ErrorCode::kShapeMismatch, "transform dimension differs from point dimension");
  Matrix out = (p.rows() * a.matrix()).rowwise() + shift.transpose();
  return PointSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Rotation error metrics

double rotation_error_deg(const Rotation& r1, const Rotation& r2) {
  if (r1.dim() != r2.dim()) fail(ErrorCode::kShapeMismatch, "rotation dimensions differ");
  const Matrix rel = r1.matrix() * r2.matrix().transpose();
  const Index d = rel.rows();
  if (d == 2) return std::abs(std::atan2(rel(1, 0), rel(0, 0))) * kRadToDeg;
  if (d == 3) {
    // atan2 of (sin, cos) instead of a bare arccos keeps precision near 0.
    const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
    const Eigen::Vector3d axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                               rel(1, 0) - rel(0, 1));
    const double s = axis.norm() / 2.0;
    return std::atan2(s, c) * kRadToDeg;
  }
  Eigen::EigenSolver<Matrix> es(rel, false);
  double sum_sq = 0.0;
  for (Index k = 0; k < d; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    const double a = std::atan2(lambda.imag(), lambda.real());
    sum_sq += a * a;
  }
  return std::sqrt(sum_sq / 2.0) * kRadToDeg;
}

std::array<double, 3> euler_zyx(const Rotation& r) {
  if (r.dim() != 3) fail(ErrorCode::kShapeMismatch, "Euler angles need d = 3");
  const Matrix& m = r.matrix();
  const double yaw = std::atan2(m(1, 0), m(0, 0));
  const double pitch = std::atan2(-m(2, 0), std::hypot(m(2, 1), m(2, 2)));
  const double roll = std::atan2(m(2, 1), m(2, 2));
  return {yaw, pitch, roll};
}

EulerError euler_error_deg(const Rotation& r1, const Rotation& r2) {
  const auto a = euler_zyx(r1);
  const auto b = euler_zyx(r2);
  return {wrap_deg((a[0] - b[0]) * kRadToDeg), wrap_deg((a[1] - b[1]) * kRadToDeg),
          wrap_deg((a[2] - b[2]) * kRadToDeg)};
}

// ---------------------------------------------------------------------------
// Construction helpers

Rotation axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  if (!(axis.norm() > 0.0)) fail(ErrorCode::kInvalidArgument, "rotation axis is zero");
  const Eigen::Matrix3d m = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  return Rotation(Matrix(m));
}

Rotation plane_rotation(Index d, Index i, Index j, double angle_rad) {
  if (i == j || i < 0 || j < 0 || i >= d || j >= d)
    fail(ErrorCode::kInvalidArgument, "invalid rotation plane");
  Matrix m = Matrix::Identity(d, d);
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  m(i, i) = c;
  m(j, j) = c;
  m(i, j) = -s;
  m(j, i) = s;
  return Rotation(std::move(m));
}

Rotation random_rotation(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k)
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return Rotation(std::move(q));
}

}  // namespace posecore
