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

// Point sets, rigid motions and the optimal-rotation solver.
//
// Conventions: a PointSet stores one marker per row. A RigidMotion (R, t)
// maps an observed point q to R*q + t, and the alignment cost of a pair
// (P, Q) under it is sum_i w_i * |p_i - (R*q_i + t)|^2. estimate_pose returns
// the motion that minimizes this cost, i.e. the motion taking Q onto P.

#ifndef POSECORE_GEOMETRY_HPP
#define POSECORE_GEOMETRY_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace posecore {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Empty span means "uniform weights".
using Weights = std::span<const double>;

inline constexpr double kDefaultTol = 1e-9;

class PointSet {
 public:
  /// Throws kInvalidArgument unless n >= 1, d >= 2 and all entries are finite.
  explicit PointSet(Matrix rows);
  PointSet(std::initializer_list<std::initializer_list<double>> rows);

  Index size() const noexcept { return rows_.rows(); }
  Index dim() const noexcept { return rows_.cols(); }
  const Matrix& rows() const noexcept { return rows_; }
  Vector row(Index i) const { return rows_.row(i).transpose(); }

  PointSet select(std::span<const Index> indices) const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.rows_.rows() == b.rows_.rows() && a.rows_.cols() == b.rows_.cols() &&
           a.rows_ == b.rows_;
  }

 private:
  Matrix rows_;
};

/// A proper rotation. Construction checks R^T R = I and det R = 1.
class Rotation {
 public:
  explicit Rotation(Matrix m, double tol = kDefaultTol);

  static Rotation identity(Index d);

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Rotation transpose() const;

  friend Rotation operator*(const Rotation& a, const Rotation& b);

 private:
  struct Unchecked {};
  Rotation(Matrix m, Unchecked) : m_(std::move(m)) {}
  Matrix m_;
};

struct RigidMotion {
  Rotation rotation;
  Vector translation;

  static RigidMotion identity(Index d);
  RigidMotion inverse() const;
  /// (a * b)(x) = a(b(x)).
  friend RigidMotion operator*(const RigidMotion& a, const RigidMotion& b);
};

/// Factors of a d x d matrix M = U * diag(D) * V^T with D nonincreasing and
/// det(U) * det(V) = 1. When the raw decomposition has det(U)det(V) = -1 the
/// column of V paired with the smallest singular value is negated, so
/// U * diag(D) * V^T reproduces M only up to that column's sign.
struct SvdFactors {
  Matrix U;
  Vector D;
  Matrix V;
  bool sign_corrected = false;
};

SvdFactors svd_factors(const Matrix& m);

struct KabschResult {
  Rotation rotation;
  SvdFactors factors;
  /// Set when the cross-covariance was identically zero and the identity was
  /// returned by convention.
  bool degenerate = false;
};

/// sum_i w_i p_i q_i^T (d x d).
Matrix cross_covariance(const PointSet& p, const PointSet& q, Weights w = {});

/// Optimal rotation for a given cross-covariance sum_i w_i p_i q_i^T.
KabschResult kabsch(const Matrix& cross_cov);

Vector centroid(const PointSet& p, Weights w = {});

/// argmin_R sum_i w_i |p_i - R q_i|^2 over proper rotations. No centering.
Rotation kabsch_rotation(const PointSet& p, const PointSet& q, Weights w = {});

/// Optimal rigid motion (centers both sets at their weighted centroids).
RigidMotion estimate_pose(const PointSet& p, const PointSet& q, Weights w = {});

double cost(const PointSet& p, const PointSet& q, const Rotation& r, Weights w = {});
double cost(const PointSet& p, const PointSet& q, const RigidMotion& m,
            Weights w = {});

/// Cost of (p, q) under rotation r combined with its best translation.
double cost_with_optimal_translation(const PointSet& p, const PointSet& q,
                                     const Rotation& r, Weights w = {});

/// min over rotations and translations of the alignment cost.
double optimal_cost(const PointSet& p, const PointSet& q, Weights w = {});

PointSet apply_motion(const PointSet& q, const RigidMotion& m);

/// Rows p_i -> a^T p_i + shift, i.e. the row-matrix product P*A + 1*shift^T.
PointSet transform_rows(const PointSet& p, const Rotation& a, const Vector& shift);

/// Geodesic distance between rotations in degrees: the angle of R1 * R2^T.
/// For d > 3 this is the norm of the relative rotation's principal angles.
double rotation_error_deg(const Rotation& r1, const Rotation& r2);

/// Per-axis absolute differences in degrees, ZYX (yaw, pitch, roll). d = 3.
struct EulerError {
  double yaw = 0;
  double pitch = 0;
  double roll = 0;
};
EulerError euler_error_deg(const Rotation& r1, const Rotation& r2);

/// ZYX angles (yaw, pitch, roll) in radians of a 3 x 3 rotation.
std::array<double, 3> euler_zyx(const Rotation& r);

// Construction helpers.

/// Rotation by `angle_rad` about `axis` (d = 3, axis need not be unit).
Rotation axis_angle(const Eigen::Vector3d& axis, double angle_rad);

/// Rotation by `angle_rad` in the (i, j) coordinate plane of R^d.
Rotation plane_rotation(Index d, Index i, Index j, double angle_rad);

/// Haar-distributed rotation in SO(d).
Rotation random_rotation(Index d, std::mt19937_64& rng);

}  // namespace posecore

#endif  // POSECORE_GEOMETRY_HPP
