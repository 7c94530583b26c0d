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

// Synthetic tracking experiments: simulated marker trajectories, coreset vs
// uniform-sample rotation error per calculation cycle, timing sweeps over n
// and d, and the two-cadence tracking loop (slow coreset refresh, fast
// per-frame pose from the last published coreset).

#ifndef POSECORE_BENCH_HPP
#define POSECORE_BENCH_HPP

#include "posecore/geometry.hpp"
#include "posecore/pose_coreset.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace posecore::bench {

enum class Layout { kPlanar10, kRandom, kFile };

struct TrialConfig {
  Layout layout = Layout::kPlanar10;
  std::string layout_path;
  /// Marker count and dimension for the random layout (planar10 fixes n = 10).
  Index n = 10;
  Index d = 3;
  /// Rank of the random layout; 0 means min(n - 1, d).
  Index rank = 0;
  /// Per-coordinate Gaussian noise on the observed markers.
  double sigma = 0.01;
  int frames = 3000;
  std::vector<int> cycles{1, 5, 10, 15};
  std::uint64_t seed = 1;
  double rotation_deg_per_frame = 1.0;
  double translation_per_frame = 0.001;
  bool keep_traces = true;
  /// Tracking loop only: report wall-clock medians of the fast and slow
  /// paths. Off by default so that reports are reproducible byte for byte.
  bool record_latency = false;

  /// Throws Error(kInvalidArgument) on an inconsistent configuration.
  void validate() const;
};

struct TimingConfig {
  std::vector<Index> n_values{1000, 10000, 100000, 1000000};
  Index n_sweep_d = 3;
  std::vector<Index> d_values{3, 10, 30, 100};
  Index d_sweep_n = 10000;
  /// Marker rank in the d sweep (0: full rank). Full-rank coresets at large d
  /// have O(d^2) points, and building them needs O(d^6) work per insertion.
  Index d_sweep_rank = 2;
  int warmup = 5;
  int repetitions = 30;
  std::uint64_t seed = 1;

  void validate() const;
};

/// The marker model P (layout scaled so every marker lies within 0.5 of the
/// centroid).
PointSet make_layout(const TrialConfig& cfg);

/// The fixed 10-marker planar rig (d = 3, z = 0).
PointSet planar10_layout();

/// n Gaussian markers spanning a random rank-`rank` subspace of R^d.
PointSet random_layout(Index n, Index d, Index rank, std::uint64_t seed);

struct Frame {
  int index = 0;
  PointSet q;
  /// Q_t = truth(P) + noise.
  RigidMotion truth;
};

std::vector<Frame> simulate_frames(const TrialConfig& cfg, const PointSet& model);
std::vector<Frame> simulate_frames(const TrialConfig& cfg);

struct CycleSummary {
  int cycle = 0;
  double coreset_mean_deg = 0.0;
  double uniform_mean_deg = 0.0;
  double coreset_max_deg = 0.0;
  std::size_t recomputations = 0;
  double mean_coreset_size = 0.0;
  int max_staleness = 0;
};

struct TimingRow {
  std::string sweep;  // "n" or "d"
  Index n = 0;
  Index d = 0;
  Index rank = 0;
  Index coreset_size = 0;
  double coreset_median_ns = 0.0;
  double full_median_ns = 0.0;
};

struct TrialReport {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<CycleSummary> cycles;
  /// Per-cycle, per-frame rotation errors in degrees.
  std::vector<std::vector<double>> coreset_trace;
  std::vector<std::vector<double>> uniform_trace;
  /// Per-cycle, per-frame frames since the coreset in use was built.
  std::vector<std::vector<int>> staleness_trace;
  std::vector<TimingRow> timings;
  /// Wall-clock measurements of the tracking loop (ns), per cycle.
  std::vector<double> fast_path_median_ns;
  std::vector<double> slow_path_median_ns;
};

TrialReport run_error_trial(const TrialConfig& cfg);
TrialReport run_timing_trial(const TimingConfig& cfg);
TrialReport run_tracking_loop(const TrialConfig& cfg);

enum class ReportFormat { kJson, kCsv };

/// Identical reports give identical bytes. Measured wall-clock durations are
/// grouped under the "timings" key (JSON) so they can be told apart.
std::string format_report(const TrialReport& r, ReportFormat format);
void emit_report(const TrialReport& r, ReportFormat format, const std::string& path);

/// Build and toolchain description embedded in every report.
std::vector<std::pair<std::string, std::string>> environment_metadata();

/// Single-producer / multi-reader slot for immutable coreset snapshots.
class CoresetChannel {
 public:
  struct Snapshot {
    std::shared_ptr<const PoseCoreset> coreset;
    int frame = -1;
  };

  void publish(std::shared_ptr<const PoseCoreset> c, int frame);
  Snapshot latest() const;

 private:
  mutable std::mutex mu_;
  Snapshot current_;
};

/// Stream-splitting seed derivation used throughout the harness.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace posecore::bench

#endif  // POSECORE_BENCH_HPP
