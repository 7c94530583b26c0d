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

#include "posecore/error.hpp"
#include "posecore/geometry.hpp"
#include "posecore/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace posecore {
namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

PointSet gaussian_points(Index n, Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = g(rng);
  return PointSet(std::move(m));
}

// Independent angle of a 3x3 rotation: reconstruct R from every candidate
// (axis, angle) on the axis found by the eigenvector for eigenvalue 1 and
// keep the closest one.
double axis_angle_oracle_deg(const Matrix& r) {
  Eigen::EigenSolver<Matrix> es(r);
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double best_gap = 1e300;
  for (int k = 0; k < 3; ++k) {
    const double gap = std::abs(es.eigenvalues()(k) - std::complex<double>(1.0, 0.0));
    if (gap < best_gap) {
      best_gap = gap;
      axis = es.eigenvectors().col(k).real().normalized();
    }
  }
  double best = 0.0, best_err = 1e300;
  for (int sign : {-1, 1})
    for (int step = 0; step <= 180000; ++step) {
      const double a = sign * step * std::numbers::pi / 180000.0;
      const double err = (axis_angle(axis, a).matrix() - r).norm();
      if (err < best_err) {
        best_err = err;
        best = std::abs(a);
      }
    }
  // Refine by golden-section around the grid optimum.
  double lo = best - std::numbers::pi / 180000.0, hi = best + std::numbers::pi / 180000.0;
  auto f = [&](double a) {
    return std::min((axis_angle(axis, a).matrix() - r).norm(), (axis_angle(axis, -a).matrix() - r).norm());
  };
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (f(m1) < f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi) * kDeg;
}

TEST(PointSet, ValidatesShape) {
  EXPECT_THROW(PointSet(Matrix(0, 3)), Error);
  EXPECT_THROW(PointSet(Matrix::Zero(3, 1)), Error);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(PointSet(std::move(bad)), Error);
  const PointSet p{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(p.size(), 2);
  EXPECT_EQ(p.dim(), 3);
  const std::vector<Index> idx{1};
  EXPECT_EQ(p.select(idx), (PointSet{{4, 5, 6}}));
}

TEST(Rotation, RejectsNonRotations) {
  EXPECT_THROW(Rotation(Matrix::Identity(3, 3) * 2.0), Error);
  Matrix reflect = Matrix::Identity(3, 3);
  reflect(2, 2) = -1;
  EXPECT_THROW(Rotation{reflect}, Error);
  EXPECT_NO_THROW(Rotation(Matrix::Identity(4, 4)));
}

TEST(Svd, ReconstructsAndIsSignCorrected) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = gaussian_points(4, 4, rng).rows();
    const SvdFactors f = svd_factors(m);
    const Matrix rec = f.U * f.D.asDiagonal() * f.V.transpose();
    EXPECT_LE((rec - m).norm(), 1e-9 * m.norm());
    EXPECT_NEAR(f.U.determinant() * f.V.determinant(), 1.0, 1e-9);
  }
}

TEST(Centroid, Examples) {
  const PointSet p{{0, 0}, {2, 0}};
  EXPECT_TRUE(centroid(p).isApprox(Eigen::Vector2d(1, 0)));
  EXPECT_TRUE(centroid(PointSet{{1, 2, 3}}).isApprox(Eigen::Vector3d(1, 2, 3)));
  const std::vector<double> w{3, 1};
  EXPECT_LE((centroid(p, w) - Eigen::Vector2d(0.5, 0)).norm(), 1e-15);
  const std::vector<double> zero{0, 0};
  try {
    centroid(p, zero);
    FAIL() << "zero weights accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateWeights);
  }
}

TEST(Kabsch, SelfAlignmentIsIdentity) {
  std::mt19937_64 rng(1);
  const PointSet p = gaussian_points(12, 3, rng);
  EXPECT_LE((kabsch_rotation(p, p).matrix() - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Kabsch, RecoversConstructedRotation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const PointSet p = gaussian_points(20, 3, rng);
    const Rotation r0 = random_rotation(3, rng);
    const PointSet q(p.rows() * r0.matrix());  // q_i = R0^T p_i
    const Rotation r = kabsch_rotation(p, q);
    EXPECT_LT(rotation_error_deg(r, r0) / kDeg, 1e-9);
  }
}

TEST(Kabsch, NeverReturnsAReflection) {
  const PointSet p{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const PointSet q{{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  const Rotation r = kabsch_rotation(p, q);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
  const double best = cost(p, q, r);
  for (int k = 0; k < static_cast<int>(2 * std::numbers::pi / 1e-4); ++k) {
    const double a = k * 1e-4;
    EXPECT_GE(cost(p, q, plane_rotation(2, 0, 1, a)), best - 1e-12) << "angle " << a;
  }
}

TEST(Kabsch, ZeroCrossCovarianceIsIdentity) {
  const KabschResult k = kabsch(Matrix::Zero(3, 3));
  EXPECT_TRUE(k.degenerate);
  EXPECT_TRUE(k.rotation.matrix().isIdentity());
}

TEST(Kabsch, ShapeMismatch) {
  EXPECT_THROW(kabsch_rotation(PointSet{{1, 2}}, PointSet{{1, 2}, {3, 4}}), Error);
  EXPECT_THROW(kabsch(Matrix::Zero(2, 3)), Error);
}

TEST(Kabsch, BeatsRandomRotations) {
  std::mt19937_64 rng(3);
  const PointSet p = gaussian_points(30, 3, rng);
  const Rotation r0 = random_rotation(3, rng);
  Matrix qm = p.rows() * r0.matrix();
  std::normal_distribution<double> noise(0.0, 0.1);
  for (Index i = 0; i < qm.size(); ++i) qm(i) += noise(rng);
  const PointSet q(std::move(qm));
  const double best = cost(p, q, kabsch_rotation(p, q));
  // Zero translation throughout, both for the raw and the centered pair.
  const Matrix pc = p.rows().rowwise() - centroid(p).transpose();
  const Matrix qc = q.rows().rowwise() - centroid(q).transpose();
  const PointSet pcs(pc), qcs(qc);
  const double centered_best = cost(pcs, qcs, kabsch_rotation(pcs, qcs));
  for (int k = 0; k < 1000; ++k) {
    const Rotation probe = random_rotation(3, rng);
    EXPECT_GE(cost(p, q, probe), best - 1e-12);
    EXPECT_GE(cost(pcs, qcs, probe), centered_best - 1e-12);
  }
}

TEST(Kabsch, HigherDimensions) {
  std::mt19937_64 rng(4);
  for (Index d : {2, 4, 6}) {
    const PointSet p = gaussian_points(3 * d, d, rng);
    const Rotation r0 = random_rotation(d, rng);
    const PointSet q(p.rows() * r0.matrix());
    EXPECT_LT(rotation_error_deg(kabsch_rotation(p, q), r0), 1e-7) << "d=" << d;
  }
}

TEST(Kabsch, EquivariantUnderIndependentRotations) {
  std::mt19937_64 rng(5);
  const PointSet p = gaussian_points(15, 3, rng);
  const PointSet q = gaussian_points(15, 3, rng);
  const Rotation a = random_rotation(3, rng), b = random_rotation(3, rng);
  const Rotation r = kabsch_rotation(p, q);
  // p -> A^T p, q -> B^T q maps the optimum to A^T R B.
  const Rotation r2 = kabsch_rotation(PointSet(p.rows() * a.matrix()), PointSet(q.rows() * b.matrix()));
  EXPECT_LT(rotation_error_deg(r2, a.transpose() * r * b), 1e-8);
}

TEST(EstimatePose, Examples) {
  std::mt19937_64 rng(6);
  const PointSet p = gaussian_points(10, 3, rng);
  const RigidMotion self = estimate_pose(p, p);
  EXPECT_LE((self.rotation.matrix() - Matrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LE(self.translation.norm(), 1e-12);

  const Rotation r0 = random_rotation(3, rng);
  const Vector mu0 = Eigen::Vector3d(0.3, -1.2, 2.0);
  const PointSet q((p.rows().rowwise() - mu0.transpose()) * r0.matrix());  // q = R0^T (p - mu0)
  const RigidMotion m = estimate_pose(p, q);
  EXPECT_LE((m.rotation.matrix() - r0.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((m.translation - mu0).cwiseAbs().maxCoeff(), 1e-9);

  const PointSet one{{1, 2, 3}}, other{{-1, 0, 5}};
  const RigidMotion single = estimate_pose(one, other);
  EXPECT_TRUE(single.rotation.matrix().isIdentity());
  EXPECT_TRUE(single.translation.isApprox(Eigen::Vector3d(2, 2, -2)));
  EXPECT_NEAR(cost(one, other, single), 0.0, 1e-15);
}

TEST(Cost, Examples) {
  const PointSet p{{1, 0}, {0, 2}};
  EXPECT_EQ(cost(p, p, RigidMotion::identity(2)), 0.0);
  EXPECT_DOUBLE_EQ(cost(PointSet{{1, 0}}, PointSet{{0, 1}}, Rotation::identity(2)), 2.0);
  EXPECT_THROW(cost(p, PointSet{{1, 0}}, Rotation::identity(2)), Error);
}

TEST(RotationError, Examples) {
  std::mt19937_64 rng(8);
  const Rotation r1 = random_rotation(3, rng);
  EXPECT_NEAR(rotation_error_deg(r1, r1), 0.0, 1e-6);
  const Rotation yaw = axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2);
  EXPECT_NEAR(rotation_error_deg(Rotation::identity(3), yaw), 90.0, 1e-12);
  const EulerError e = euler_error_deg(Rotation::identity(3), yaw);
  EXPECT_NEAR(e.yaw, 90.0, 1e-12);
  EXPECT_NEAR(e.pitch, 0.0, 1e-12);
  EXPECT_NEAR(e.roll, 0.0, 1e-12);
}

TEST(RotationError, MatchesAxisAngleOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Rotation a = random_rotation(3, rng), b = random_rotation(3, rng);
    const double oracle = axis_angle_oracle_deg((a * b.transpose()).matrix());
    EXPECT_NEAR(rotation_error_deg(a, b), oracle, 1e-6);
  }
}

TEST(RotationError, SmallAnglesAreAccurate) {
  for (double deg : {1e-9, 1e-7, 1e-4, 0.5, 179.9}) {
    const Rotation r = axis_angle(Eigen::Vector3d(1, 2, 3), deg / kDeg);
    EXPECT_NEAR(rotation_error_deg(r, Rotation::identity(3)), deg, 1e-12 + 1e-9 * deg);
  }
  EXPECT_NEAR(rotation_error_deg(plane_rotation(2, 0, 1, 0.25), Rotation::identity(2)), 0.25 * kDeg, 1e-12);
  // Principal angles in R^4: two independent planes.
  const Rotation r4 = plane_rotation(4, 0, 1, 0.3) * plane_rotation(4, 2, 3, 0.4);
  EXPECT_NEAR(rotation_error_deg(r4, Rotation::identity(4)), 0.5 * kDeg, 1e-9);
}

TEST(Motion, ApplyAndInvert) {
  std::mt19937_64 rng(10);
  const PointSet q = gaussian_points(8, 3, rng);
  EXPECT_EQ(apply_motion(q, RigidMotion::identity(3)), q);
  const Vector t = Eigen::Vector3d(1, -2, 0.5);
  const PointSet shifted = apply_motion(q, {Rotation::identity(3), t});
  for (Index i = 0; i < q.size(); ++i) EXPECT_TRUE(shifted.row(i).isApprox(q.row(i) + t));
  const RigidMotion m{random_rotation(3, rng), t};
  const PointSet back = apply_motion(apply_motion(q, m), m.inverse());
  EXPECT_LE((back.rows() - q.rows()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(apply_motion(q, RigidMotion::identity(2)), Error);
}

TEST(Io, CsvAndJsonRoundTrip) {
  const PointSet p{{0.1, -2.5, 3e-7}, {1.0 / 3.0, 4, 5}};
  EXPECT_EQ(parse_points_csv(format_points_csv(p)), p);
  EXPECT_EQ(parse_points_json(format_points_json(p)), p);
  EXPECT_EQ(parse_points_csv("# comment\n1,2\n\n3,4\n"), (PointSet{{1, 2}, {3, 4}}));
  EXPECT_THROW(parse_points_csv("1,2\n3\n"), Error);
  EXPECT_THROW(parse_points_csv("1;2\n"), Error);
  EXPECT_THROW(parse_points_json("[[1,2],[3]]"), Error);
}

}  // namespace
}  // namespace posecore
