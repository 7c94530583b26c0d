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

#include "posecore/bench.hpp"
#include "posecore/error.hpp"
#include "posecore/pose_coreset.hpp"

#include <gtest/gtest.h>

#include <random>

namespace posecore {
namespace {

struct Instance {
  PointSet p;
  PointSet q;
};

// n markers spanning a rank-r subspace, Q = rotated and shifted copy plus noise.
Instance make_instance(Index n, Index d, Index r, double sigma, std::mt19937_64& rng) {
  const PointSet p = bench::random_layout(n, d, r, rng());
  const RigidMotion m{random_rotation(d, rng), Vector::Constant(d, 0.7)};
  Matrix q = apply_motion(p, m).rows();
  std::normal_distribution<double> g(0.0, 1.0);
  for (Index i = 0; i < q.size(); ++i) q(i) += sigma * g(rng);
  return {p, PointSet(std::move(q))};
}

double exactness_gap(const PoseCoreset& c, const PointSet& p, const PointSet& q) {
  const Rotation r = coreset_pose(c, p, q).rotation;
  const double opt = optimal_cost(p, q);
  return (cost_with_optimal_translation(p, q, r) - opt) / (1.0 + opt);
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(bench::planar10_layout()).rank, 2);
  std::mt19937_64 rng(1);
  EXPECT_EQ(numerical_rank(bench::random_layout(20, 3, 3, 5)).rank, 3);
  Matrix line(6, 3);
  for (Index i = 0; i < 6; ++i) line.row(i) = (i - 2.5) * Eigen::RowVector3d(1, -2, 0.5);
  EXPECT_EQ(numerical_rank(PointSet(line)).rank, 1);
  try {
    numerical_rank(PointSet(Matrix::Zero(4, 3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankDeficient);
  }
  const RankInfo info = numerical_rank(bench::planar10_layout());
  EXPECT_LE((bench::planar10_layout().rows() * info.basis).col(2).norm(), 1e-12);
}

TEST(ReducedVector, Shape) {
  const SvdFactors f = svd_factors(Matrix::Identity(3, 3));
  EXPECT_EQ(reduced_vector(Vector::Zero(3), Eigen::Vector3d(1, 2, 3), f, 2), Vector::Zero(4));
  EXPECT_EQ(reduced_vector(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3), f, 3).size(), 6);
  EXPECT_THROW(reduced_vector(Vector::Zero(2), Vector::Zero(3), f, 2), Error);
}

TEST(ReducedVector, KeystoneIdentity) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 2 + trial % 4;
    const Index r = 1 + trial % d;
    const Instance in = make_instance(30, d, r, trial % 2 ? 0.01 : 0.0, rng);
    const PoseCoreset c = pose_coreset(in.p, in.q);
    Vector sum = Vector::Zero(c.reduced_dim());
    for (Index i = 0; i < in.p.size(); ++i)
      sum += reduced_vector(in.p.row(i) - c.p_centroid(), in.q.row(i) - c.q_centroid(), c.factors(),
                            c.rank());
    EXPECT_LE(sum.norm(), 1e-8 * c.factors().D.norm()) << "d=" << d << " r=" << r;
  }
}

TEST(PoseCoreset, PlanarRigHasAtMostFivePoints) {
  std::mt19937_64 rng(3);
  const PointSet p = bench::planar10_layout();
  for (int trial = 0; trial < 50; ++trial) {
    Matrix q = apply_motion(p, {random_rotation(3, rng), Vector::Random(3)}).rows();
    std::normal_distribution<double> g(0.0, 0.01);
    for (Index i = 0; i < q.size(); ++i) q(i) += g(rng);
    const PoseCoreset c = pose_coreset(p, PointSet(q));
    EXPECT_EQ(c.rank(), 2);
    EXPECT_EQ(c.reduced_dim(), 4);
    EXPECT_LE(c.size(), 5u);
    EXPECT_LT(exactness_gap(c, p, PointSet(q)), 1e-8);
  }
}

TEST(PoseCoreset, SmallInputIsTheFullSet) {
  std::mt19937_64 rng(4);
  const Instance in = make_instance(6, 3, 3, 0.05, rng);
  const PoseCoreset c = pose_coreset(in.p, in.q);
  ASSERT_EQ(c.size(), 6u);
  for (double w : c.weights().weights()) EXPECT_EQ(w, 1.0);
  const WeightedPairs pairs = extract_weighted_pairs(c, in.p, in.q);
  EXPECT_EQ(pairs.p_rows, in.p);
}

TEST(PoseCoreset, ExactAgainstFullKabsch) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Instance in = make_instance(100, 3, 3, 0.01 * (trial % 3), rng);
    const PoseCoreset c = pose_coreset(in.p, in.q);
    EXPECT_LE(c.size(), 7u);
    EXPECT_TRUE(c.anchors_exact());
    EXPECT_LT(exactness_gap(c, in.p, in.q), 1e-8);
    EXPECT_LT(rotation_error_deg(coreset_pose(c, in.p, in.q).rotation, kabsch_rotation(in.p, in.q)), 1e-6);
    EXPECT_LT(diagonal_defect(c, in.p, in.q), 1e-9);
  }
}

TEST(PoseCoreset, ExactWithoutRefinement) {
  std::mt19937_64 rng(6);
  PoseCoresetOptions opts;
  opts.refine = false;
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = make_instance(60, 3, 2 + trial % 2, 0.01, rng);
    const PoseCoreset c = pose_coreset(in.p, in.q, opts);
    EXPECT_LE(c.size(), static_cast<std::size_t>(c.reduced_dim() + 1));
    EXPECT_LT(exactness_gap(c, in.p, in.q), 1e-8);
  }
}

TEST(PoseCoreset, HigherDimensionsAndRanks) {
  std::mt19937_64 rng(7);
  for (Index d : {2, 4, 5})
    for (Index r = 2; r <= d; ++r) {
      const Instance in = make_instance(80, d, r, 0.01, rng);
      const PoseCoreset c = pose_coreset(in.p, in.q);
      EXPECT_EQ(c.rank(), r);
      EXPECT_LE(c.size(), static_cast<std::size_t>(r * (d - 1) + 1));
      EXPECT_LT(exactness_gap(c, in.p, in.q), 1e-8) << "d=" << d << " r=" << r;
    }
}

TEST(PoseCoreset, CollinearModel) {
  std::mt19937_64 rng(17);
  PoseCoresetOptions balanced;
  balanced.balance_rank_one = true;
  for (Index d : {2, 3, 4, 5}) {
    const Instance in = make_instance(80, d, 1, 0.01, rng);
    const PoseCoreset plain = pose_coreset(in.p, in.q);
    EXPECT_EQ(plain.rank(), 1);
    EXPECT_LE(plain.size(), static_cast<std::size_t>(d));

    const PoseCoreset c = pose_coreset(in.p, in.q, balanced);
    EXPECT_LE(c.size(), static_cast<std::size_t>(d + 1));
    EXPECT_LT(exactness_gap(c, in.p, in.q), 1e-8) << "d=" << d;
    for (int k = 0; k < 5; ++k) {
      const Rotation a = random_rotation(d, rng), b = random_rotation(d, rng);
      EXPECT_LT(validate_coreset(c, in.p, in.q, a, b, Vector::Random(d), Vector::Random(d)),
                1e-8 * (1 + optimal_cost(in.p, in.q)));
    }
  }
}

TEST(PoseCoreset, ObservedSetOfLowerRank) {
  // P spans R^3 while every Q marker lies in a plane.
  std::mt19937_64 rng(8);
  const PointSet p = bench::random_layout(40, 3, 3, 9);
  Matrix q = bench::random_layout(40, 3, 2, 10).rows();
  const PoseCoreset c = pose_coreset(p, PointSet(q));
  EXPECT_LE(c.size(), 7u);
  EXPECT_LT(exactness_gap(c, p, PointSet(q)), 1e-8);
  for (int k = 0; k < 10; ++k) {
    const Rotation a = random_rotation(3, rng), b = random_rotation(3, rng);
    EXPECT_LT(validate_coreset(c, p, PointSet(q), a, b, Vector::Random(3), Vector::Random(3)),
              1e-8 * (1 + optimal_cost(p, PointSet(q))));
  }
}

TEST(PoseCoreset, Errors) {
  EXPECT_THROW(pose_coreset(PointSet(Matrix::Ones(4, 3)), PointSet(Matrix::Ones(4, 3))), Error);
  EXPECT_THROW(pose_coreset(PointSet(Matrix::Random(4, 3)), PointSet(Matrix::Random(5, 3))), Error);
}

TEST(WeightedPairs, AlgebraicIdentity) {
  std::mt19937_64 rng(11);
  const Instance in = make_instance(50, 3, 3, 0.02, rng);
  const PoseCoreset c = pose_coreset(in.p, in.q);
  const WeightedPairs w = extract_weighted_pairs(c, in.p, in.q);
  Matrix direct = Matrix::Zero(3, 3);
  const auto idx = c.weights().indices();
  for (std::size_t j = 0; j < idx.size(); ++j)
    direct += c.weights().weights()[j] * in.p.row(idx[j]) * in.q.row(idx[j]).transpose();
  EXPECT_LE((w.p_scaled.rows().transpose() * w.q_scaled.rows() - direct).cwiseAbs().maxCoeff(), 1e-12);

  const PointSet shorter(in.p.rows().topRows(idx.back()));
  try {
    extract_weighted_pairs(c, shorter, shorter);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
}

TEST(Validate, TransformsKeepTheCoresetExact) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance in = make_instance(100, 3, 2 + trial % 2, 0.01, rng);
    const PoseCoreset c = pose_coreset(in.p, in.q);
    const double tol = 1e-8;
    const Rotation id = Rotation::identity(3);
    const Vector zero = Vector::Zero(3);
    EXPECT_LT(validate_coreset(c, in.p, in.q, id, id, zero, zero), tol * (1 + optimal_cost(in.p, in.q)));
    for (int k = 0; k < 50; ++k) {
      const Rotation a = random_rotation(3, rng), b = random_rotation(3, rng);
      const Vector mu = 5.0 * Vector::Random(3), nu = 5.0 * Vector::Random(3);
      EXPECT_LT(validate_coreset(c, in.p, in.q, a, b, mu, nu), tol * (1 + optimal_cost(in.p, in.q)));
      EXPECT_LT(validate_coreset(c, in.p, in.q, id, id, mu, nu), tol * (1 + optimal_cost(in.p, in.q)));
    }
  }
}

TEST(PoseCoreset, JsonRoundTrip) {
  std::mt19937_64 rng(13);
  const Instance in = make_instance(30, 3, 2, 0.01, rng);
  const PoseCoreset c = pose_coreset(in.p, in.q);
  const std::string text = c.to_json();
  const PoseCoreset back = PoseCoreset::from_json(text);
  EXPECT_EQ(back.to_json(), text);
  EXPECT_EQ(back.rank(), c.rank());
  EXPECT_EQ(back.dim(), 3);
  EXPECT_LT(rotation_error_deg(coreset_pose(back, in.p, in.q).rotation,
                               coreset_pose(c, in.p, in.q).rotation),
            1e-12);
  EXPECT_THROW(PoseCoreset::from_json("{\"indices\": [1]}"), Error);
}

TEST(PoseCoreset, StaleCoresetTracksRigidMotion) {
  // Built once, reused after the observed set moves rigidly: still exact.
  std::mt19937_64 rng(14);
  const PointSet p = bench::planar10_layout();
  const PointSet q0 = apply_motion(p, {random_rotation(3, rng), Vector::Random(3)});
  const PoseCoreset c = pose_coreset(p, q0);
  for (int k = 0; k < 20; ++k) {
    const PointSet qk = apply_motion(q0, {random_rotation(3, rng), Vector::Random(3)});
    EXPECT_LT(rotation_error_deg(coreset_pose(c, p, qk).rotation, kabsch_rotation(p, qk)), 1e-6);
  }
}

}  // namespace
}  // namespace posecore
