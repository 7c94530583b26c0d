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
#include "posecore/io.hpp"
#include "posecore/matching.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace posecore::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point start) {
  return std::chrono::duration<double, std::nano>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string layout_name(const TrialConfig& cfg) {
  switch (cfg.layout) {
    case Layout::kPlanar10: return "planar10";
    case Layout::kRandom: return "random";
    case Layout::kFile: return "file:" + cfg.layout_path;
  }
  return "?";
}

std::vector<std::pair<std::string, std::string>> describe(const TrialConfig& cfg) {
  return {{"layout", layout_name(cfg)},
          {"n", std::to_string(cfg.n)},
          {"d", std::to_string(cfg.d)},
          {"rank", std::to_string(cfg.rank)},
          {"sigma", format_double(cfg.sigma)},
          {"frames", std::to_string(cfg.frames)},
          {"cycles", join_ints(cfg.cycles)},
          {"seed", std::to_string(cfg.seed)},
          {"rotation_deg_per_frame", format_double(cfg.rotation_deg_per_frame)},
          {"translation_per_frame", format_double(cfg.translation_per_frame)}};
}

// Rescales so that the farthest marker is 0.5 from the centroid.
Matrix normalize_extent(Matrix m) {
  const Eigen::RowVectorXd c = m.colwise().mean();
  m.rowwise() -= c;
  const double r = m.rowwise().norm().maxCoeff();
  if (r > 0.0) m *= 0.5 / r;
  return m;
}

std::vector<Index> sample_without_replacement(Index n, Index k, std::mt19937_64& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  k = std::min(k, n);
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Rotation trajectory_rotation(Index d, double angle_rad) {
  if (d == 3) return axis_angle(Eigen::Vector3d(0.2, 0.3, 1.0), angle_rad);
  return plane_rotation(d, 0, 1, angle_rad);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return restart_seed(seed, stream);
}

// ---------------------------------------------------------------------------
// Configuration

void TrialConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, what); };
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad("sigma must be finite and >= 0");
  if (frames < 1) bad("frames must be >= 1");
  if (cycles.empty()) bad("at least one calculation cycle is required");
  for (int c : cycles)
    if (c < 1 || c > frames) bad("calculation cycle " + std::to_string(c) + " is outside [1, frames]");
  if (d < 2) bad("d must be >= 2");
  if (layout == Layout::kRandom && n < 2) bad("random layout needs n >= 2");
  if (rank < 0 || rank > d) bad("rank must lie in [0, d]");
  if (layout == Layout::kFile && layout_path.empty()) bad("file layout needs a path");
  if (!std::isfinite(rotation_deg_per_frame) || !std::isfinite(translation_per_frame))
    bad("trajectory rates must be finite");
}

void TimingConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, what); };
  if (n_values.empty() || d_values.empty()) bad("timing sweeps need nonempty n and d lists");
  for (Index n : n_values)
    if (n < 2) bad("timing n values must be >= 2");
  for (Index d : d_values)
    if (d < 2) bad("timing d values must be >= 2");
  if (n_sweep_d < 2 || d_sweep_n < 2) bad("fixed n / d must be >= 2");
  if (d_sweep_rank < 0) bad("d-sweep rank must be >= 0");
  if (warmup < 0 || repetitions < 1) bad("need warmup >= 0 and repetitions >= 1");
}

// ---------------------------------------------------------------------------
// Layouts and simulation

PointSet planar10_layout() {
  // Two staggered rings, like LEDs on arms and body of a small quadcopter.
  Matrix m(10, 3);
  for (int k = 0; k < 10; ++k) {
    const double angle = std::numbers::pi * k / 5.0 + (k % 2 ? 0.15 : 0.0);
    const double radius = k % 2 ? 0.55 : 1.0;
    m(k, 0) = radius * std::cos(angle);
    m(k, 1) = 0.8 * radius * std::sin(angle);
    m(k, 2) = 0.0;
  }
  m.row(0) *= 0.9;
  m.row(3) *= 1.1;
  return PointSet(normalize_extent(std::move(m)));
}

PointSet random_layout(Index n, Index d, Index rank, std::uint64_t seed) {
  if (rank <= 0) rank = std::min(n - 1, d);
  rank = std::clamp<Index>(rank, 1, d);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix coeff(n, rank);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < rank; ++j) coeff(i, j) = normal(rng);
  const Matrix frame = random_rotation(d, rng).matrix().topRows(rank);
  return PointSet(normalize_extent(coeff * frame));
}

PointSet make_layout(const TrialConfig& cfg) {
  switch (cfg.layout) {
    case Layout::kPlanar10: {
      const PointSet base = planar10_layout();
      if (cfg.d == 3) return base;
      Matrix m = Matrix::Zero(10, cfg.d);
      m.leftCols(2) = base.rows().leftCols(2);
      return PointSet(std::move(m));
    }
    case Layout::kRandom:
      return random_layout(cfg.n, cfg.d, cfg.rank, derive_seed(cfg.seed, 17));
    case Layout::kFile: {
      PointSet p = read_points(cfg.layout_path);
      if (p.dim() != cfg.d)
        fail(ErrorCode::kInvalidArgument, "layout file dimension differs from --d");
      return p;
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown layout");
}

std::vector<Frame> simulate_frames(const TrialConfig& cfg, const PointSet& model) {
  cfg.validate();
  const Index d = model.dim();
  std::mt19937_64 rng(derive_seed(cfg.seed, 1));
  std::normal_distribution<double> noise(0.0, 1.0);
  const Vector drift = Vector::Constant(d, cfg.translation_per_frame / std::sqrt(double(d)));
  const double rate = cfg.rotation_deg_per_frame * std::numbers::pi / 180.0;

  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(cfg.frames));
  for (int t = 0; t < cfg.frames; ++t) {
    RigidMotion truth{trajectory_rotation(d, rate * t), drift * static_cast<double>(t)};
    Matrix q = apply_motion(model, truth).rows();
    if (cfg.sigma > 0.0)
      for (Index i = 0; i < q.rows(); ++i)
        for (Index j = 0; j < d; ++j) q(i, j) += cfg.sigma * noise(rng);
    frames.push_back({t, PointSet(std::move(q)), std::move(truth)});
  }
  return frames;
}

std::vector<Frame> simulate_frames(const TrialConfig& cfg) {
  return simulate_frames(cfg, make_layout(cfg));
}

// ---------------------------------------------------------------------------
// Error trial

TrialReport run_error_trial(const TrialConfig& cfg) {
  cfg.validate();
  const PointSet model = make_layout(cfg);
  const std::vector<Frame> frames = simulate_frames(cfg, model);

  std::vector<Rotation> reference;
  reference.reserve(frames.size());
  for (const Frame& f : frames) reference.push_back(estimate_pose(model, f.q).rotation);

  TrialReport report;
  report.kind = "error-trial";
  report.seed = cfg.seed;
  report.config = describe(cfg);

  for (int cycle : cfg.cycles) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(cycle)));
    std::vector<double> core_err, unif_err;
    core_err.reserve(frames.size());
    unif_err.reserve(frames.size());
    std::unique_ptr<PoseCoreset> coreset;
    std::vector<Index> sample;
    CycleSummary summary;
    summary.cycle = cycle;
    double size_sum = 0.0;
    for (const Frame& f : frames) {
      if (f.index % cycle == 0) {
        coreset = std::make_unique<PoseCoreset>(pose_coreset(model, f.q));
        sample = sample_without_replacement(model.size(), static_cast<Index>(coreset->size()), rng);
        ++summary.recomputations;
        size_sum += static_cast<double>(coreset->size());
      }
      const Rotation& ref = reference[static_cast<std::size_t>(f.index)];
      const Rotation rc = coreset_pose(*coreset, model, f.q).rotation;
      const Rotation ru = estimate_pose(model.select(sample), f.q.select(sample)).rotation;
      core_err.push_back(rotation_error_deg(rc, ref));
      unif_err.push_back(rotation_error_deg(ru, ref));
      summary.max_staleness = std::max(summary.max_staleness, f.index % cycle);
    }
    summary.coreset_mean_deg = mean(core_err);
    summary.uniform_mean_deg = mean(unif_err);
    summary.coreset_max_deg = *std::max_element(core_err.begin(), core_err.end());
    summary.mean_coreset_size = size_sum / static_cast<double>(summary.recomputations);
    report.cycles.push_back(summary);
    if (cfg.keep_traces) {
      report.coreset_trace.push_back(std::move(core_err));
      report.uniform_trace.push_back(std::move(unif_err));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Tracking loop

void CoresetChannel::publish(std::shared_ptr<const PoseCoreset> c, int frame) {
  std::lock_guard<std::mutex> lock(mu_);
  current_ = Snapshot{std::move(c), frame};
}

CoresetChannel::Snapshot CoresetChannel::latest() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_;
}

TrialReport run_tracking_loop(const TrialConfig& cfg) {
  cfg.validate();
  const PointSet model = make_layout(cfg);
  const std::vector<Frame> frames = simulate_frames(cfg, model);

  TrialReport report;
  report.kind = "tracking-loop";
  report.seed = cfg.seed;
  report.config = describe(cfg);

  for (int cycle : cfg.cycles) {
    CoresetChannel channel;
    std::vector<double> errors, fast_ns, slow_ns;
    std::vector<int> staleness;
    CycleSummary summary;
    summary.cycle = cycle;
    double size_sum = 0.0;
    // Cadence scheduling on one context: the slow task runs on frames that
    // are multiples of `cycle`, the fast task on every frame, and the fast
    // task only ever reads the last published snapshot.
    for (const Frame& f : frames) {
      if (f.index % cycle == 0) {
        const auto start = Clock::now();
        auto c = std::make_shared<const PoseCoreset>(pose_coreset(model, f.q));
        slow_ns.push_back(elapsed_ns(start));
        size_sum += static_cast<double>(c->size());
        ++summary.recomputations;
        channel.publish(std::move(c), f.index);
      }
      const auto start = Clock::now();
      const CoresetChannel::Snapshot snap = channel.latest();
      const RigidMotion m = coreset_pose(*snap.coreset, model, f.q);
      fast_ns.push_back(elapsed_ns(start));

      const Rotation ref = estimate_pose(model, f.q).rotation;
      errors.push_back(rotation_error_deg(m.rotation, ref));
      staleness.push_back(f.index - snap.frame);
      summary.max_staleness = std::max(summary.max_staleness, staleness.back());
    }
    summary.coreset_mean_deg = mean(errors);
    summary.coreset_max_deg = *std::max_element(errors.begin(), errors.end());
    summary.mean_coreset_size = size_sum / static_cast<double>(summary.recomputations);
    report.cycles.push_back(summary);
    if (cfg.record_latency) {
      report.fast_path_median_ns.push_back(median(fast_ns));
      report.slow_path_median_ns.push_back(median(slow_ns));
    }
    if (cfg.keep_traces) {
      report.coreset_trace.push_back(std::move(errors));
      report.staleness_trace.push_back(std::move(staleness));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Timing trial

namespace {

TimingRow time_point(const std::string& sweep, Index n, Index d, Index rank, const TimingConfig& cfg,
                     std::uint64_t seed) {
  const PointSet p = random_layout(n, d, rank, seed);
  std::mt19937_64 rng(derive_seed(seed, 3));
  const RigidMotion motion{random_rotation(d, rng), Vector::Constant(d, 0.1)};
  Matrix qm = apply_motion(p, motion).rows();
  std::normal_distribution<double> noise(0.0, 0.01);
  for (Index i = 0; i < qm.rows(); ++i)
    for (Index j = 0; j < d; ++j) qm(i, j) += noise(rng);
  const PointSet q(std::move(qm));

  const PoseCoreset c = pose_coreset(p, q);
  const auto idx = c.weights().indices();
  const PointSet p_rows = p.select(idx);

  std::vector<double> core_ns, full_ns;
  double sink = 0.0;
  // Separate loops: interleaving would let each full pass evict the few rows
  // the coreset path reads.
  for (int rep = 0; rep < cfg.warmup + cfg.repetitions; ++rep) {
    const auto start = Clock::now();
    const RigidMotion mc = coreset_pose_from_rows(c, p_rows, q.select(idx));
    const double tc = elapsed_ns(start);
    sink += mc.rotation.matrix()(0, 0);
    if (rep >= cfg.warmup) core_ns.push_back(tc);
  }
  for (int rep = 0; rep < cfg.warmup + cfg.repetitions; ++rep) {
    const auto start = Clock::now();
    const RigidMotion mf = estimate_pose(p, q);
    const double tf = elapsed_ns(start);
    sink += mf.rotation.matrix()(0, 0);
    if (rep >= cfg.warmup) full_ns.push_back(tf);
  }
  if (!std::isfinite(sink)) fail(ErrorCode::kInternal, "non-finite pose in timing loop");

  TimingRow row;
  row.sweep = sweep;
  row.n = n;
  row.d = d;
  row.rank = c.rank();
  row.coreset_size = static_cast<Index>(c.size());
  row.coreset_median_ns = median(core_ns);
  row.full_median_ns = median(full_ns);
  return row;
}

}  // namespace

TrialReport run_timing_trial(const TimingConfig& cfg) {
  cfg.validate();
  TrialReport report;
  report.kind = "timing-trial";
  report.seed = cfg.seed;
  auto list = [](const std::vector<Index>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  report.config = {{"n_values", list(cfg.n_values)},
                   {"n_sweep_d", std::to_string(cfg.n_sweep_d)},
                   {"d_values", list(cfg.d_values)},
                   {"d_sweep_n", std::to_string(cfg.d_sweep_n)},
                   {"d_sweep_rank", std::to_string(cfg.d_sweep_rank)},
                   {"warmup", std::to_string(cfg.warmup)},
                   {"repetitions", std::to_string(cfg.repetitions)},
                   {"seed", std::to_string(cfg.seed)}};
  std::uint64_t stream = 100;
  for (Index n : cfg.n_values)
    report.timings.push_back(
        time_point("n", n, cfg.n_sweep_d, 0, cfg, derive_seed(cfg.seed, stream++)));
  for (Index d : cfg.d_values)
    report.timings.push_back(
        time_point("d", cfg.d_sweep_n, d, cfg.d_sweep_rank, cfg, derive_seed(cfg.seed, stream++)));
  return report;
}

// ---------------------------------------------------------------------------
// Reports

std::vector<std::pair<std::string, std::string>> environment_metadata() {
  return {{"library", "posecore 0.1.0"},
          {"compiler", __VERSION__},
          {"cplusplus", std::to_string(__cplusplus)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
#ifdef NDEBUG
          {"assertions", "off"},
#else
          {"assertions", "on"},
#endif
          {"assignment_solver", "Hungarian (O(k^2 m))"}};
}

namespace {

nlohmann::ordered_json pairs_json(const std::vector<std::pair<std::string, std::string>>& kv) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

std::string report_json(const TrialReport& r) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["config"] = pairs_json(r.config);
  j["environment"] = pairs_json(environment_metadata());
  if (!r.cycles.empty()) {
    oj cycles = oj::array();
    for (const CycleSummary& c : r.cycles) {
      oj e;
      e["cycle"] = c.cycle;
      e["coreset_mean_deg"] = c.coreset_mean_deg;
      if (r.kind == "error-trial") e["uniform_mean_deg"] = c.uniform_mean_deg;
      e["coreset_max_deg"] = c.coreset_max_deg;
      e["recomputations"] = c.recomputations;
      e["mean_coreset_size"] = c.mean_coreset_size;
      e["max_staleness"] = c.max_staleness;
      cycles.push_back(std::move(e));
    }
    j["cycles"] = std::move(cycles);
  }
  if (!r.coreset_trace.empty()) {
    oj traces;
    traces["coreset"] = r.coreset_trace;
    if (!r.uniform_trace.empty()) traces["uniform"] = r.uniform_trace;
    if (!r.staleness_trace.empty()) traces["staleness"] = r.staleness_trace;
    j["traces"] = std::move(traces);
  }
  oj timings = oj::object();
  if (!r.timings.empty()) {
    oj points = oj::array();
    std::vector<double> core_ns, full_ns;
    for (const TimingRow& t : r.timings) {
      oj e;
      e["sweep"] = t.sweep;
      e["n"] = t.n;
      e["d"] = t.d;
      e["rank"] = t.rank;
      e["coreset_size"] = t.coreset_size;
      points.push_back(std::move(e));
      core_ns.push_back(t.coreset_median_ns);
      full_ns.push_back(t.full_median_ns);
    }
    j["points"] = std::move(points);
    timings["coreset_median_ns"] = core_ns;
    timings["full_median_ns"] = full_ns;
  }
  if (!r.fast_path_median_ns.empty()) {
    timings["fast_path_median_ns"] = r.fast_path_median_ns;
    timings["slow_path_median_ns"] = r.slow_path_median_ns;
  }
  if (!timings.empty()) j["timings"] = std::move(timings);
  return j.dump(2) + "\n";
}

std::string report_csv(const TrialReport& r) {
  std::string out;
  if (r.kind == "timing-trial") {
    out += "sweep,n,d,rank,coreset_size,coreset_median_ns,full_median_ns\n";
    for (const TimingRow& t : r.timings)
      out += t.sweep + "," + std::to_string(t.n) + "," + std::to_string(t.d) + "," +
             std::to_string(t.rank) + "," + std::to_string(t.coreset_size) + "," +
             format_double(t.coreset_median_ns) + "," + format_double(t.full_median_ns) + "\n";
    return out;
  }
  const bool tracking = r.kind == "tracking-loop";
  out += "seed,frame";
  for (const CycleSummary& c : r.cycles) {
    const std::string x = std::to_string(c.cycle);
    out += ",coreset_c" + x + (tracking ? ",staleness_c" : ",uniform_c") + x;
  }
  out += "\n";
  const std::string seed = std::to_string(r.seed);
  const std::size_t frames = r.coreset_trace.empty() ? 0 : r.coreset_trace.front().size();
  for (std::size_t t = 0; t < frames; ++t) {
    out += seed + "," + std::to_string(t);
    for (std::size_t c = 0; c < r.cycles.size(); ++c) {
      out += "," + format_double(r.coreset_trace[c][t]);
      out += "," + (tracking ? std::to_string(r.staleness_trace[c][t])
                             : format_double(r.uniform_trace[c][t]));
    }
    out += "\n";
  }
  out += seed + ",mean";
  for (const CycleSummary& c : r.cycles) {
    out += "," + format_double(c.coreset_mean_deg);
    out += "," + (tracking ? std::to_string(c.max_staleness) : format_double(c.uniform_mean_deg));
  }
  out += "\n";
  return out;
}

}  // namespace

std::string format_report(const TrialReport& r, ReportFormat format) {
  return format == ReportFormat::kJson ? report_json(r) : report_csv(r);
}

void emit_report(const TrialReport& r, ReportFormat format, const std::string& path) {
  write_text_file(path, format_report(r, format));
}

}  // namespace posecore::bench
