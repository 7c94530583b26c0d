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

// posecore command line: experiment drivers and one-shot pose/coreset tools.
// Links only against the C interface.

#include "posecore/posecore.h"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(pc_status s) {
  switch (s) {
    case PC_OK: return 0;
    case PC_DEGENERATE_WEIGHTS:
    case PC_RANK_DEFICIENT:
    case PC_CONTRACT_VIOLATION:
    case PC_INTERNAL: return kExitNumerical;
    default: return kExitConfig;
  }
}

struct Failure {
  pc_status status;
};

void check(pc_status s) {
  if (s != PC_OK) throw Failure{s};
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected a comma-separated list of non-negative integers");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct StringDeleter {
  void operator()(char* s) const { pc_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{PC_IO};
  }
}

struct PointsHandle {
  pc_points* p = nullptr;
  ~PointsHandle() { pc_points_destroy(p); }
};

struct ReportHandle {
  pc_report* r = nullptr;
  ~ReportHandle() { pc_report_destroy(r); }
};

struct CoresetHandle {
  pc_coreset* c = nullptr;
  ~CoresetHandle() { pc_coreset_destroy(c); }
};

struct Options {
  std::size_t n = 10;
  std::size_t d = 3;
  std::size_t rank = 0;
  double sigma = 0.01;
  int frames = 3000;
  std::string cycles = "1,5,10,15";
  std::uint64_t seed = 1;
  std::string layout = "planar10";
  std::string out;
  std::string format = "json";
  bool no_traces = false;
  bool latency = false;
  // timing-trial
  std::string n_list = "1000,10000,100000,1000000";
  std::string d_list = "3,10,30,100";
  std::size_t fixed_d = 3;
  std::size_t fixed_n = 10000;
  std::size_t d_rank = 2;
  int warmup = 5;
  int reps = 30;
  // pose / coreset
  std::string p_path;
  std::string q_path;
};

pc_format report_format(const Options& o) { return o.format == "csv" ? PC_FORMAT_CSV : PC_FORMAT_JSON; }

void write_report(const pc_report* r, const Options& o) {
  char* raw = nullptr;
  check(pc_report_format(r, report_format(o), &raw));
  OwnedString text(raw);
  emit(text.get(), o.out);
}

void run_trial(const Options& o, bool tracking) {
  const std::vector<int> cycles = parse_list<int>(o.cycles, "--cycles");
  pc_trial_config cfg;
  pc_trial_config_init(&cfg);
  std::string path;
  if (o.layout == "planar10") {
    cfg.layout = PC_LAYOUT_PLANAR10;
  } else if (o.layout == "random") {
    cfg.layout = PC_LAYOUT_RANDOM;
  } else if (o.layout.rfind("file:", 0) == 0) {
    cfg.layout = PC_LAYOUT_FILE;
    path = o.layout.substr(5);
    cfg.layout_path = path.c_str();
  } else {
    throw CLI::ValidationError("--layout", "expected planar10, random or file:PATH");
  }
  cfg.n = o.n;
  cfg.d = o.d;
  cfg.rank = o.rank;
  cfg.sigma = o.sigma;
  cfg.frames = o.frames;
  cfg.cycles = cycles.data();
  cfg.cycle_count = cycles.size();
  cfg.seed = o.seed;
  cfg.keep_traces = o.no_traces ? 0 : 1;
  cfg.record_latency = o.latency ? 1 : 0;
  ReportHandle r;
  check(tracking ? pc_run_tracking_loop(&cfg, &r.r) : pc_run_error_trial(&cfg, &r.r));
  write_report(r.r, o);
}

void run_timing(const Options& o) {
  const auto ns = parse_list<std::size_t>(o.n_list, "--n");
  const auto ds = parse_list<std::size_t>(o.d_list, "--d");
  pc_timing_config cfg;
  pc_timing_config_init(&cfg);
  cfg.n_values = ns.data();
  cfg.n_count = ns.size();
  cfg.d_values = ds.data();
  cfg.d_count = ds.size();
  cfg.n_sweep_d = o.fixed_d;
  cfg.d_sweep_n = o.fixed_n;
  cfg.d_sweep_rank = o.d_rank;
  cfg.warmup = o.warmup;
  cfg.repetitions = o.reps;
  cfg.seed = o.seed;
  ReportHandle r;
  check(pc_run_timing_trial(&cfg, &r.r));
  write_report(r.r, o);
}

std::string number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void load_pair(const Options& o, PointsHandle& p, PointsHandle& q) {
  check(pc_points_read(o.p_path.c_str(), &p.p));
  check(pc_points_read(o.q_path.c_str(), &q.p));
}

void run_pose(const Options& o) {
  PointsHandle p, q;
  load_pair(o, p, q);
  const std::size_t d = pc_points_dim(p.p);
  std::vector<double> rot(d * d), trans(d);
  check(pc_estimate_pose(p.p, q.p, nullptr, rot.data(), trans.data()));
  if (o.format == "csv") {
    // d rotation rows, then the translation.
    std::string text;
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (j) text += ',';
        text += number(i < d ? rot[i * d + j] : trans[j]);
      }
      text += '\n';
    }
    emit(text, o.out);
    return;
  }
  char* raw = nullptr;
  check(pc_motion_to_json(rot.data(), trans.data(), d, &raw));
  OwnedString text(raw);
  emit(text.get(), o.out);
}

void run_coreset(const Options& o) {
  PointsHandle p, q;
  load_pair(o, p, q);
  CoresetHandle c;
  check(pc_coreset_build(p.p, q.p, 0.0, &c.c));
  if (o.format == "csv") {
    const std::size_t k = pc_coreset_size(c.c);
    std::vector<std::int64_t> idx(k);
    std::vector<double> w(k);
    check(pc_coreset_indices(c.c, idx.data(), k));
    check(pc_coreset_weights(c.c, w.data(), k));
    std::string text = "index,weight\n";
    for (std::size_t t = 0; t < k; ++t) text += std::to_string(idx[t]) + ',' + number(w[t]) + '\n';
    emit(text, o.out);
    return;
  }
  char* raw = nullptr;
  check(pc_coreset_to_json(c.c, &raw));
  OwnedString text(raw);
  emit(text.get(), o.out);
}

void add_output_flags(CLI::App* cmd, Options& o, bool with_format) {
  cmd->add_option("--out", o.out, "Output path (default: stdout)");
  if (with_format)
    cmd->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
}

void add_trial_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n, "Marker count (random layout)");
  cmd->add_option("--d", o.d, "Dimension");
  cmd->add_option("--rank", o.rank, "Rank of the random layout (0: full)");
  cmd->add_option("--sigma", o.sigma, "Per-coordinate noise standard deviation");
  cmd->add_option("--frames", o.frames, "Number of frames");
  cmd->add_option("--cycles", o.cycles, "Comma-separated calculation cycles");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--layout", o.layout, "planar10 | random | file:PATH");
  cmd->add_flag("--no-traces", o.no_traces, "Omit per-frame traces");
  add_output_flags(cmd, o, true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posecore: exact pose coresets and tracking experiments"};
  app.require_subcommand(1);
  Options o;

  auto* error = app.add_subcommand("error-trial", "Coreset vs uniform-sample rotation error");
  add_trial_flags(error, o);
  auto* tracking = app.add_subcommand("tracking-loop", "Two-cadence tracking loop");
  add_trial_flags(tracking, o);
  tracking->add_flag("--latency", o.latency, "Report wall-clock medians of both paths");

  auto* timing = app.add_subcommand("timing-trial", "Coreset-path vs full Kabsch timing sweeps");
  timing->add_option("--n", o.n_list, "Comma-separated n values (d fixed)");
  timing->add_option("--d", o.d_list, "Comma-separated d values (n fixed)");
  timing->add_option("--fixed-d", o.fixed_d, "d used in the n sweep");
  timing->add_option("--fixed-n", o.fixed_n, "n used in the d sweep");
  timing->add_option("--d-rank", o.d_rank, "Marker rank in the d sweep (0: full)");
  timing->add_option("--warmup", o.warmup, "Warmup repetitions");
  timing->add_option("--reps", o.reps, "Measured repetitions");
  timing->add_option("--seed", o.seed, "Random seed");
  add_output_flags(timing, o, true);

  auto* pose = app.add_subcommand("pose", "Rigid motion aligning Q onto P");
  pose->add_option("p", o.p_path, "P points (CSV or .json)")->required();
  pose->add_option("q", o.q_path, "Q points (CSV or .json)")->required();
  add_output_flags(pose, o, true);

  auto* coreset = app.add_subcommand("coreset", "Pose coreset of (P, Q)");
  coreset->add_option("p", o.p_path, "P points (CSV or .json)")->required();
  coreset->add_option("q", o.q_path, "Q points (CSV or .json)")->required();
  add_output_flags(coreset, o, true);

  try {
    app.parse(argc, argv);
    if (error->parsed()) run_trial(o, false);
    if (tracking->parsed()) run_trial(o, true);
    if (timing->parsed()) run_timing(o);
    if (pose->parsed()) run_pose(o);
    if (coreset->parsed()) run_coreset(o);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  } catch (const Failure& f) {
    std::cerr << "error: " << pc_status_string(f.status);
    if (*pc_last_error()) std::cerr << ": " << pc_last_error();
    std::cerr << "\n";
    return exit_code(f.status);
  }
  return 0;
}
