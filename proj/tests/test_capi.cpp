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

#include "posecore/posecore.h"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

namespace {

TEST(CApi, PointsLifecycle) {
  const double data[] = {0, 0, 1, 2, 3, 4};
  pc_points* p = nullptr;
  ASSERT_EQ(pc_points_create(data, 3, 2, &p), PC_OK);
  EXPECT_EQ(pc_points_size(p), 3u);
  EXPECT_EQ(pc_points_dim(p), 2u);
  double out[6];
  ASSERT_EQ(pc_points_copy(p, out, 6), PC_OK);
  EXPECT_EQ(out[5], 4.0);
  EXPECT_EQ(pc_points_copy(p, out, 5), PC_OUT_OF_RANGE);
  pc_points_destroy(p);

  EXPECT_EQ(pc_points_create(data, 3, 1, &p), PC_INVALID_ARGUMENT);
  EXPECT_NE(std::string(pc_last_error()), "");
  EXPECT_EQ(pc_points_parse_csv("1,2\n3\n", &p), PC_PARSE);
  EXPECT_EQ(pc_points_parse_json("[[1,2],[3,4]]", &p), PC_OK);
  pc_points_destroy(p);
  EXPECT_EQ(pc_points_create(nullptr, 1, 2, &p), PC_INVALID_ARGUMENT);
  pc_points_destroy(nullptr);
}

TEST(CApi, PoseAndCoreset) {
  // Planar rig rotated 30 degrees about z and shifted.
  std::vector<double> pd, qd;
  const double c = std::cos(0.5236), s = std::sin(0.5236);
  for (int i = 0; i < 10; ++i) {
    const double x = std::cos(0.7 * i) * (1 + 0.1 * i), y = std::sin(0.9 * i);
    pd.insert(pd.end(), {x, y, 0.0});
    // p = R q + t with t = (1, 2, 3) -> q = R^T (p - t)
    const double px = x - 1, py = y - 2, pz = -3;
    qd.insert(qd.end(), {c * px + s * py, -s * px + c * py, pz});
  }
  pc_points *p = nullptr, *q = nullptr;
  ASSERT_EQ(pc_points_create(pd.data(), 10, 3, &p), PC_OK);
  ASSERT_EQ(pc_points_create(qd.data(), 10, 3, &q), PC_OK);

  double r[9], t[3];
  ASSERT_EQ(pc_estimate_pose(p, q, nullptr, r, t), PC_OK);
  EXPECT_NEAR(t[0], 1, 1e-9);
  EXPECT_NEAR(t[1], 2, 1e-9);
  EXPECT_NEAR(t[2], 3, 1e-9);
  EXPECT_NEAR(r[0], c, 1e-9);
  EXPECT_NEAR(r[1], -s, 1e-9);

  pc_coreset* cs = nullptr;
  ASSERT_EQ(pc_coreset_build(p, q, 0.0, &cs), PC_OK);
  EXPECT_LE(pc_coreset_size(cs), 5u);
  EXPECT_EQ(pc_coreset_rank(cs), 2u);
  EXPECT_EQ(pc_coreset_dim(cs), 3u);
  std::vector<int64_t> idx(pc_coreset_size(cs));
  std::vector<double> w(pc_coreset_size(cs));
  ASSERT_EQ(pc_coreset_indices(cs, idx.data(), idx.size()), PC_OK);
  ASSERT_EQ(pc_coreset_weights(cs, w.data(), w.size()), PC_OK);
  for (double x : w) EXPECT_GT(x, 0.0);

  double rc[9], tc[3];
  ASSERT_EQ(pc_coreset_pose(cs, p, q, rc, tc), PC_OK);
  double err = 1;
  ASSERT_EQ(pc_rotation_error_deg(r, rc, 3, &err), PC_OK);
  EXPECT_LT(err, 1e-6);

  char* json = nullptr;
  ASSERT_EQ(pc_coreset_to_json(cs, &json), PC_OK);
  pc_coreset* back = nullptr;
  ASSERT_EQ(pc_coreset_from_json(json, &back), PC_OK);
  EXPECT_EQ(pc_coreset_size(back), pc_coreset_size(cs));
  pc_string_free(json);
  EXPECT_EQ(pc_coreset_from_json("{", &back), PC_PARSE);

  char* motion = nullptr;
  ASSERT_EQ(pc_motion_to_json(r, t, 3, &motion), PC_OK);
  EXPECT_NE(std::string(motion).find("\"rotation\""), std::string::npos);
  pc_string_free(motion);

  pc_coreset_destroy(back);
  pc_coreset_destroy(cs);
  pc_points_destroy(p);
  pc_points_destroy(q);
}

TEST(CApi, ErrorCodes) {
  const double zero[9] = {0};
  pc_points* z = nullptr;
  ASSERT_EQ(pc_points_create(zero, 3, 3, &z), PC_OK);
  pc_coreset* cs = nullptr;
  EXPECT_EQ(pc_coreset_build(z, z, 0.0, &cs), PC_RANK_DEFICIENT);
  pc_points_destroy(z);
  double r[4];
  const double bad[4] = {1, 0, 0};
  EXPECT_EQ(pc_kabsch(bad, 2, r), PC_OK);
  EXPECT_EQ(pc_kabsch(nullptr, 2, r), PC_INVALID_ARGUMENT);
  EXPECT_STREQ(pc_status_string(PC_OK), "ok");
}

TEST(CApi, TrialsAndReports) {
  pc_trial_config cfg;
  pc_trial_config_init(&cfg);
  EXPECT_EQ(cfg.cycle_count, 4u);
  cfg.frames = 60;
  pc_report* a = nullptr;
  pc_report* b = nullptr;
  ASSERT_EQ(pc_run_error_trial(&cfg, &a), PC_OK);
  ASSERT_EQ(pc_run_error_trial(&cfg, &b), PC_OK);
  char *ta = nullptr, *tb = nullptr;
  ASSERT_EQ(pc_report_format(a, PC_FORMAT_CSV, &ta), PC_OK);
  ASSERT_EQ(pc_report_format(b, PC_FORMAT_CSV, &tb), PC_OK);
  EXPECT_STREQ(ta, tb);
  pc_string_free(ta);
  pc_string_free(tb);
  ASSERT_EQ(pc_report_cycle_count(a), 4u);
  int cycle = 0;
  double core = -1, unif = -1;
  ASSERT_EQ(pc_report_cycle(a, 3, &cycle, &core, &unif), PC_OK);
  EXPECT_EQ(cycle, 15);
  EXPECT_GE(core, 0.0);
  EXPECT_EQ(pc_report_cycle(a, 4, &cycle, &core, &unif), PC_OUT_OF_RANGE);
  EXPECT_EQ(pc_report_write(a, PC_FORMAT_JSON, "/nonexistent/x.json"), PC_IO);
  pc_report_destroy(a);
  pc_report_destroy(b);

  cfg.frames = 10;
  const int cycles[] = {20};
  cfg.cycles = cycles;
  cfg.cycle_count = 1;
  EXPECT_EQ(pc_run_tracking_loop(&cfg, &a), PC_INVALID_ARGUMENT);

  pc_timing_config tc;
  pc_timing_config_init(&tc);
  const size_t ns[] = {100, 300};
  const size_t ds[] = {3};
  tc.n_values = ns;
  tc.n_count = 2;
  tc.d_values = ds;
  tc.d_count = 1;
  tc.d_sweep_n = 200;
  tc.warmup = 0;
  tc.repetitions = 2;
  ASSERT_EQ(pc_run_timing_trial(&tc, &a), PC_OK);
  char* json = nullptr;
  ASSERT_EQ(pc_report_format(a, PC_FORMAT_JSON, &json), PC_OK);
  EXPECT_NE(std::string(json).find("\"timings\""), std::string::npos);
  pc_string_free(json);
  pc_report_destroy(a);
}

}  // namespace
