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

/* C interface to the posecore library. All objects are opaque handles owned
 * by the caller and released with the matching *_destroy function. Every
 * function returns a pc_status; on failure pc_last_error() describes the
 * problem (thread-local, valid until the next call on that thread). */

#ifndef POSECORE_H
#define POSECORE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PC_API __declspec(dllexport)
#else
#define PC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pc_status {
  PC_OK = 0,
  PC_INVALID_ARGUMENT = 1,
  PC_SHAPE_MISMATCH = 2,
  PC_DEGENERATE_WEIGHTS = 3,
  PC_RANK_DEFICIENT = 4,
  PC_EMPTY_INPUT = 5,
  PC_OUT_OF_RANGE = 6,
  PC_CONTRACT_VIOLATION = 7,
  PC_IO = 8,
  PC_PARSE = 9,
  PC_INTERNAL = 10
} pc_status;

typedef struct pc_points pc_points;
typedef struct pc_coreset pc_coreset;
typedef struct pc_report pc_report;

PC_API const char* pc_version(void);
PC_API const char* pc_last_error(void);
PC_API const char* pc_status_string(pc_status s);

/* Strings returned through char** out-parameters must be released here. */
PC_API void pc_string_free(char* s);

/* ---- point sets (n x d, row-major) ---- */
PC_API pc_status pc_points_create(const double* data, size_t n, size_t d, pc_points** out);
PC_API pc_status pc_points_read(const char* path, pc_points** out);
PC_API pc_status pc_points_parse_csv(const char* text, pc_points** out);
PC_API pc_status pc_points_parse_json(const char* text, pc_points** out);
PC_API void pc_points_destroy(pc_points* p);
PC_API size_t pc_points_size(const pc_points* p);
PC_API size_t pc_points_dim(const pc_points* p);
/* Copies n*d values row-major into `data` (capacity in doubles). */
PC_API pc_status pc_points_copy(const pc_points* p, double* data, size_t capacity);

/* ---- pose ---- */
/* rotation: d*d row-major, translation: d values. Minimizes
 * sum w_i |p_i - (R q_i + t)|^2; weights may be NULL (uniform). */
PC_API pc_status pc_estimate_pose(const pc_points* p, const pc_points* q, const double* weights,
                                  double* rotation, double* translation);
PC_API pc_status pc_kabsch(const double* cross_cov, size_t d, double* rotation);
PC_API pc_status pc_rotation_error_deg(const double* r1, const double* r2, size_t d, double* out);
PC_API pc_status pc_motion_to_json(const double* rotation, const double* translation, size_t d,
                                   char** out);

/* ---- coresets ---- */
PC_API pc_status pc_coreset_build(const pc_points* p, const pc_points* q, double rank_tol,
                                  pc_coreset** out);
PC_API pc_status pc_coreset_from_json(const char* text, pc_coreset** out);
PC_API void pc_coreset_destroy(pc_coreset* c);
PC_API size_t pc_coreset_size(const pc_coreset* c);
PC_API size_t pc_coreset_rank(const pc_coreset* c);
PC_API size_t pc_coreset_dim(const pc_coreset* c);
PC_API pc_status pc_coreset_indices(const pc_coreset* c, int64_t* out, size_t capacity);
PC_API pc_status pc_coreset_weights(const pc_coreset* c, double* out, size_t capacity);
PC_API pc_status pc_coreset_to_json(const pc_coreset* c, char** out);
/* Pose from the coreset rows of (p, q); p and q are full-length sets. */
PC_API pc_status pc_coreset_pose(const pc_coreset* c, const pc_points* p, const pc_points* q,
                                 double* rotation, double* translation);

/* ---- experiments ---- */
typedef enum pc_layout { PC_LAYOUT_PLANAR10 = 0, PC_LAYOUT_RANDOM = 1, PC_LAYOUT_FILE = 2 } pc_layout;
typedef enum pc_format { PC_FORMAT_JSON = 0, PC_FORMAT_CSV = 1 } pc_format;

typedef struct pc_trial_config {
  pc_layout layout;
  const char* layout_path; /* PC_LAYOUT_FILE only */
  size_t n;
  size_t d;
  size_t rank;
  double sigma;
  int frames;
  const int* cycles;
  size_t cycle_count;
  uint64_t seed;
  int keep_traces;
  int record_latency;
} pc_trial_config;

typedef struct pc_timing_config {
  const size_t* n_values;
  size_t n_count;
  size_t n_sweep_d;
  const size_t* d_values;
  size_t d_count;
  size_t d_sweep_n;
  size_t d_sweep_rank;
  int warmup;
  int repetitions;
  uint64_t seed;
} pc_timing_config;

/* Fill with library defaults (array members point at static storage). */
PC_API void pc_trial_config_init(pc_trial_config* cfg);
PC_API void pc_timing_config_init(pc_timing_config* cfg);

PC_API pc_status pc_run_error_trial(const pc_trial_config* cfg, pc_report** out);
PC_API pc_status pc_run_tracking_loop(const pc_trial_config* cfg, pc_report** out);
PC_API pc_status pc_run_timing_trial(const pc_timing_config* cfg, pc_report** out);
PC_API void pc_report_destroy(pc_report* r);
PC_API pc_status pc_report_format(const pc_report* r, pc_format format, char** out);
PC_API pc_status pc_report_write(const pc_report* r, pc_format format, const char* path);
/* Mean rotation errors (degrees) for the i-th cycle; uniform is 0 for
 * tracking-loop reports. */
PC_API pc_status pc_report_cycle(const pc_report* r, size_t i, int* cycle, double* coreset_mean_deg,
                                 double* uniform_mean_deg);
PC_API size_t pc_report_cycle_count(const pc_report* r);

#ifdef __cplusplus
}
#endif

#endif /* POSECORE_H */
