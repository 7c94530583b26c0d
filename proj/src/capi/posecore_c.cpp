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

#include "posecore/bench.hpp"
#include "posecore/error.hpp"
#include "posecore/geometry.hpp"
#include "posecore/io.hpp"
#include "posecore/pose_coreset.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct pc_points {
  posecore::PointSet value;
};

struct pc_coreset {
  posecore::PoseCoreset value;
};

struct pc_report {
  posecore::bench::TrialReport value;
};

namespace {

thread_local std::string g_last_error;

pc_status to_status(posecore::ErrorCode c) { return static_cast<pc_status>(static_cast<int>(c)); }

template <typename F>
pc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return PC_OK;
  } catch (const posecore::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return PC_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PC_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PC_INTERNAL;
  }
}

void need(const void* ptr, const char* what) {
  if (ptr == nullptr)
    posecore::fail(posecore::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void store_motion(const posecore::RigidMotion& m, double* rotation, double* translation) {
  const posecore::Index d = m.rotation.dim();
  if (rotation != nullptr)
    for (posecore::Index i = 0; i < d; ++i)
      for (posecore::Index j = 0; j < d; ++j) rotation[i * d + j] = m.rotation.matrix()(i, j);
  if (translation != nullptr)
    for (posecore::Index i = 0; i < d; ++i) translation[i] = m.translation(i);
}

posecore::Matrix load_square(const double* data, size_t d) {
  posecore::Matrix m(static_cast<posecore::Index>(d), static_cast<posecore::Index>(d));
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) m(i, j) = data[i * d + j];
  return m;
}

posecore::bench::TrialConfig to_trial(const pc_trial_config* c) {
  need(c, "config");
  posecore::bench::TrialConfig cfg;
  switch (c->layout) {
    case PC_LAYOUT_PLANAR10: cfg.layout = posecore::bench::Layout::kPlanar10; break;
    case PC_LAYOUT_RANDOM: cfg.layout = posecore::bench::Layout::kRandom; break;
    case PC_LAYOUT_FILE:
      need(c->layout_path, "layout_path");
      cfg.layout = posecore::bench::Layout::kFile;
      cfg.layout_path = c->layout_path;
      break;
    default: posecore::fail(posecore::ErrorCode::kInvalidArgument, "unknown layout");
  }
  cfg.n = static_cast<posecore::Index>(c->n);
  cfg.d = static_cast<posecore::Index>(c->d);
  cfg.rank = static_cast<posecore::Index>(c->rank);
  cfg.sigma = c->sigma;
  cfg.frames = c->frames;
  if (c->cycle_count > 0) need(c->cycles, "cycles");
  cfg.cycles.assign(c->cycles, c->cycles + c->cycle_count);
  cfg.seed = c->seed;
  cfg.keep_traces = c->keep_traces != 0;
  cfg.record_latency = c->record_latency != 0;
  return cfg;
}

}  // namespace

extern "C" {

const char* pc_version(void) { return "0.1.0"; }

const char* pc_last_error(void) { return g_last_error.c_str(); }

const char* pc_status_string(pc_status s) {
  return posecore::to_string(static_cast<posecore::ErrorCode>(static_cast<int>(s)));
}

void pc_string_free(char* s) { std::free(s); }

pc_status pc_points_create(const double* data, size_t n, size_t d, pc_points** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    posecore::Matrix m(static_cast<posecore::Index>(n), static_cast<posecore::Index>(d));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < d; ++j) m(i, j) = data[i * d + j];
    *out = new pc_points{posecore::PointSet(std::move(m))};
  });
}

pc_status pc_points_read(const char* path, pc_points** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pc_points{posecore::read_points(path)};
  });
}

pc_status pc_points_parse_csv(const char* text, pc_points** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new pc_points{posecore::parse_points_csv(text)};
  });
}

pc_status pc_points_parse_json(const char* text, pc_points** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new pc_points{posecore::parse_points_json(text)};
  });
}

void pc_points_destroy(pc_points* p) { delete p; }

size_t pc_points_size(const pc_points* p) { return p ? static_cast<size_t>(p->value.size()) : 0; }

size_t pc_points_dim(const pc_points* p) { return p ? static_cast<size_t>(p->value.dim()) : 0; }

pc_status pc_points_copy(const pc_points* p, double* data, size_t capacity) {
  return guarded([&] {
    need(p, "points");
    need(data, "data");
    const auto& m = p->value.rows();
    if (capacity < static_cast<size_t>(m.size()))
      posecore::fail(posecore::ErrorCode::kOutOfRange, "buffer too small");
    for (posecore::Index i = 0; i < m.rows(); ++i)
      for (posecore::Index j = 0; j < m.cols(); ++j) data[i * m.cols() + j] = m(i, j);
  });
}

pc_status pc_estimate_pose(const pc_points* p, const pc_points* q, const double* weights,
                           double* rotation, double* translation) {
  return guarded([&] {
    need(p, "p");
    need(q, "q");
    posecore::Weights w;
    if (weights != nullptr) w = {weights, static_cast<size_t>(p->value.size())};
    store_motion(posecore::estimate_pose(p->value, q->value, w), rotation, translation);
  });
}

pc_status pc_kabsch(const double* cross_cov, size_t d, double* rotation) {
  return guarded([&] {
    need(cross_cov, "cross_cov");
    need(rotation, "rotation");
    const posecore::KabschResult k = posecore::kabsch(load_square(cross_cov, d));
    store_motion({k.rotation, posecore::Vector::Zero(static_cast<posecore::Index>(d))}, rotation,
                 nullptr);
  });
}

pc_status pc_rotation_error_deg(const double* r1, const double* r2, size_t d, double* out) {
  return guarded([&] {
    need(r1, "r1");
    need(r2, "r2");
    need(out, "out");
    *out = posecore::rotation_error_deg(posecore::Rotation(load_square(r1, d)),
                                        posecore::Rotation(load_square(r2, d)));
  });
}

pc_status pc_motion_to_json(const double* rotation, const double* translation, size_t d,
                            char** out) {
  return guarded([&] {
    need(rotation, "rotation");
    need(translation, "translation");
    need(out, "out");
    nlohmann::ordered_json j;
    j["d"] = d;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (size_t i = 0; i < d; ++i)
      rows.push_back(std::vector<double>(rotation + i * d, rotation + (i + 1) * d));
    j["rotation"] = std::move(rows);
    j["translation"] = std::vector<double>(translation, translation + d);
    *out = dup_string(j.dump(2) + "\n");
  });
}

pc_status pc_coreset_build(const pc_points* p, const pc_points* q, double rank_tol,
                           pc_coreset** out) {
  return guarded([&] {
    need(p, "p");
    need(q, "q");
    need(out, "out");
    posecore::PoseCoresetOptions opts;
    if (rank_tol > 0.0) opts.rank_tol = rank_tol;
    *out = new pc_coreset{posecore::pose_coreset(p->value, q->value, opts)};
  });
}

pc_status pc_coreset_from_json(const char* text, pc_coreset** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new pc_coreset{posecore::PoseCoreset::from_json(text)};
  });
}

void pc_coreset_destroy(pc_coreset* c) { delete c; }

size_t pc_coreset_size(const pc_coreset* c) { return c ? c->value.size() : 0; }

size_t pc_coreset_rank(const pc_coreset* c) { return c ? static_cast<size_t>(c->value.rank()) : 0; }

size_t pc_coreset_dim(const pc_coreset* c) { return c ? static_cast<size_t>(c->value.dim()) : 0; }

pc_status pc_coreset_indices(const pc_coreset* c, int64_t* out, size_t capacity) {
  return guarded([&] {
    need(c, "coreset");
    need(out, "out");
    const auto idx = c->value.weights().indices();
    if (capacity < idx.size()) posecore::fail(posecore::ErrorCode::kOutOfRange, "buffer too small");
    for (size_t i = 0; i < idx.size(); ++i) out[i] = static_cast<int64_t>(idx[i]);
  });
}

pc_status pc_coreset_weights(const pc_coreset* c, double* out, size_t capacity) {
  return guarded([&] {
    need(c, "coreset");
    need(out, "out");
    const auto w = c->value.weights().weights();
    if (capacity < w.size()) posecore::fail(posecore::ErrorCode::kOutOfRange, "buffer too small");
    std::copy(w.begin(), w.end(), out);
  });
}

pc_status pc_coreset_to_json(const pc_coreset* c, char** out) {
  return guarded([&] {
    need(c, "coreset");
    need(out, "out");
    *out = dup_string(c->value.to_json());
  });
}

pc_status pc_coreset_pose(const pc_coreset* c, const pc_points* p, const pc_points* q,
                          double* rotation, double* translation) {
  return guarded([&] {
    need(c, "coreset");
    need(p, "p");
    need(q, "q");
    store_motion(posecore::coreset_pose(c->value, p->value, q->value), rotation, translation);
  });
}

void pc_trial_config_init(pc_trial_config* cfg) {
  if (cfg == nullptr) return;
  static const int kCycles[] = {1, 5, 10, 15};
  const posecore::bench::TrialConfig d;
  cfg->layout = PC_LAYOUT_PLANAR10;
  cfg->layout_path = nullptr;
  cfg->n = static_cast<size_t>(d.n);
  cfg->d = static_cast<size_t>(d.d);
  cfg->rank = static_cast<size_t>(d.rank);
  cfg->sigma = d.sigma;
  cfg->frames = d.frames;
  cfg->cycles = kCycles;
  cfg->cycle_count = 4;
  cfg->seed = d.seed;
  cfg->keep_traces = d.keep_traces ? 1 : 0;
  cfg->record_latency = d.record_latency ? 1 : 0;
}

void pc_timing_config_init(pc_timing_config* cfg) {
  if (cfg == nullptr) return;
  static const size_t kN[] = {1000, 10000, 100000, 1000000};
  static const size_t kD[] = {3, 10, 30, 100};
  const posecore::bench::TimingConfig d;
  cfg->n_values = kN;
  cfg->n_count = 4;
  cfg->n_sweep_d = static_cast<size_t>(d.n_sweep_d);
  cfg->d_values = kD;
  cfg->d_count = 4;
  cfg->d_sweep_n = static_cast<size_t>(d.d_sweep_n);
  cfg->d_sweep_rank = static_cast<size_t>(d.d_sweep_rank);
  cfg->warmup = d.warmup;
  cfg->repetitions = d.repetitions;
  cfg->seed = d.seed;
}

pc_status pc_run_error_trial(const pc_trial_config* cfg, pc_report** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pc_report{posecore::bench::run_error_trial(to_trial(cfg))};
  });
}

pc_status pc_run_tracking_loop(const pc_trial_config* cfg, pc_report** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pc_report{posecore::bench::run_tracking_loop(to_trial(cfg))};
  });
}

pc_status pc_run_timing_trial(const pc_timing_config* c, pc_report** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    posecore::bench::TimingConfig cfg;
    if (c->n_count > 0) need(c->n_values, "n_values");
    if (c->d_count > 0) need(c->d_values, "d_values");
    cfg.n_values.assign(c->n_values, c->n_values + c->n_count);
    cfg.d_values.assign(c->d_values, c->d_values + c->d_count);
    cfg.n_sweep_d = static_cast<posecore::Index>(c->n_sweep_d);
    cfg.d_sweep_n = static_cast<posecore::Index>(c->d_sweep_n);
    cfg.d_sweep_rank = static_cast<posecore::Index>(c->d_sweep_rank);
    cfg.warmup = c->warmup;
    cfg.repetitions = c->repetitions;
    cfg.seed = c->seed;
    *out = new pc_report{posecore::bench::run_timing_trial(cfg)};
  });
}

void pc_report_destroy(pc_report* r) { delete r; }

pc_status pc_report_format(const pc_report* r, pc_format format, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    const auto f = format == PC_FORMAT_CSV ? posecore::bench::ReportFormat::kCsv
                                           : posecore::bench::ReportFormat::kJson;
    *out = dup_string(posecore::bench::format_report(r->value, f));
  });
}

pc_status pc_report_write(const pc_report* r, pc_format format, const char* path) {
  return guarded([&] {
    need(r, "report");
    need(path, "path");
    const auto f = format == PC_FORMAT_CSV ? posecore::bench::ReportFormat::kCsv
                                           : posecore::bench::ReportFormat::kJson;
    posecore::bench::emit_report(r->value, f, path);
  });
}

size_t pc_report_cycle_count(const pc_report* r) { return r ? r->value.cycles.size() : 0; }

pc_status pc_report_cycle(const pc_report* r, size_t i, int* cycle, double* coreset_mean_deg,
                          double* uniform_mean_deg) {
  return guarded([&] {
    need(r, "report");
    if (i >= r->value.cycles.size()) posecore::fail(posecore::ErrorCode::kOutOfRange, "cycle index");
    const auto& c = r->value.cycles[i];
    if (cycle) *cycle = c.cycle;
    if (coreset_mean_deg) *coreset_mean_deg = c.coreset_mean_deg;
    if (uniform_mean_deg) *uniform_mean_deg = c.uniform_mean_deg;
  });
}

}  // extern "C"
