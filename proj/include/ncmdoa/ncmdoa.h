// Copyright 2026 The ncmdoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NCMDOA_NCMDOA_H_
#define NCMDOA_NCMDOA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NCMDOA_API __declspec(dllexport)
#else
#define NCMDOA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ncmdoa_status {
  NCMDOA_OK = 0,
  NCMDOA_E_INVALID_ARGUMENT = 1,
  NCMDOA_E_DEGENERATE_GEOMETRY = 2,
  NCMDOA_E_DEGENERATE_SYSTEM = 3,
  NCMDOA_E_CONSTRAINT_COLLISION = 4,
  NCMDOA_E_IO = 5,
  NCMDOA_E_CONFIG = 6,
  NCMDOA_E_NUMERIC = 7,
  NCMDOA_E_INTERNAL = 8
} ncmdoa_status;

typedef struct ncmdoa_array ncmdoa_array;
typedef struct ncmdoa_estimate ncmdoa_estimate;
typedef struct ncmdoa_weights ncmdoa_weights;

NCMDOA_API const char* ncmdoa_version(void);
NCMDOA_API const char* ncmdoa_status_name(ncmdoa_status status);
/* Message of the last failure on the calling thread. */
NCMDOA_API const char* ncmdoa_last_error(void);
/* Releases strings returned through char** parameters. */
NCMDOA_API void ncmdoa_free(char* text);

/* Arrays. Positions are sensors x 3 row-major, metres. */
NCMDOA_API ncmdoa_status ncmdoa_array_create(const double* positions,
                                             size_t sensors, size_t reference,
                                             double sampling_rate,
                                             size_t frame_length,
                                             double wave_speed,
                                             ncmdoa_array** out);
NCMDOA_API ncmdoa_status ncmdoa_array_load(const char* path,
                                           ncmdoa_array** out);
/* 4x4 URA, 2 cm pitch, 16 kHz, 128-point frames. */
NCMDOA_API ncmdoa_status ncmdoa_array_default(ncmdoa_array** out);
NCMDOA_API void ncmdoa_array_destroy(ncmdoa_array* array);
NCMDOA_API size_t ncmdoa_array_sensors(const ncmdoa_array* array);
NCMDOA_API size_t ncmdoa_array_bins(const ncmdoa_array* array);

/* Complex outputs are interleaved re/im. Angles in radians. */
NCMDOA_API ncmdoa_status ncmdoa_steering_vector(const ncmdoa_array* array,
                                                double azimuth,
                                                double elevation, size_t bin,
                                                double* out);

/* One-bin constrained variance fit of the normal system
 * 0.5 s^T A s - q^T s, s >= 0. a is 4x4 row-major in the order
 * (desired, interferer, diffuse, white). */
NCMDOA_API ncmdoa_status ncmdoa_solve_nonnegative(const double* a,
                                                  const double* q,
                                                  double* sigma,
                                                  unsigned* active_mask);

/* Joint interferer DoA and variance estimate from a time-domain mixture.
 * channels[m] points at samples values. settings_json may be NULL. */
NCMDOA_API ncmdoa_status ncmdoa_estimate_create(
    const ncmdoa_array* array, const double* const* channels, size_t samples,
    double desired_azimuth, double desired_elevation,
    const char* settings_json, ncmdoa_estimate** out);
NCMDOA_API void ncmdoa_estimate_destroy(ncmdoa_estimate* estimate);
NCMDOA_API ncmdoa_status ncmdoa_estimate_interferer(
    const ncmdoa_estimate* estimate, double* azimuth, double* elevation);
/* bins x 4 values. */
NCMDOA_API ncmdoa_status ncmdoa_estimate_variances(
    const ncmdoa_estimate* estimate, double* out);
/* Fails with NCMDOA_E_NUMERIC when MUSIC found no admissible peak. */
NCMDOA_API ncmdoa_status ncmdoa_estimate_music(const ncmdoa_estimate* estimate,
                                               double* msc_azimuth,
                                               double* wmsc_azimuth);
NCMDOA_API ncmdoa_status ncmdoa_estimate_info(const ncmdoa_estimate* estimate,
                                              char** json);

/* method: "ncm-lcmv", "ncm-mvdr" or "music-lcmp". */
NCMDOA_API ncmdoa_status ncmdoa_beamformer_design(
    const ncmdoa_estimate* estimate, const char* method,
    ncmdoa_weights** out);
NCMDOA_API void ncmdoa_weights_destroy(ncmdoa_weights* weights);
/* sensors complex values for one bin. */
NCMDOA_API ncmdoa_status ncmdoa_weights_get(const ncmdoa_weights* weights,
                                            size_t bin, double* out);
/* Filters a multichannel signal; out receives *out_samples values and must
 * hold at least samples. */
NCMDOA_API ncmdoa_status ncmdoa_weights_apply(const ncmdoa_weights* weights,
                                              const double* const* channels,
                                              size_t samples, double* out,
                                              size_t* out_samples);

/* Pipeline stages. JSON arguments may be NULL for defaults; array_path NULL
 * selects the default array. */
NCMDOA_API ncmdoa_status ncmdoa_simulate(const char* config_json,
                                         const char* array_path,
                                         const char* out_dir);
NCMDOA_API ncmdoa_status ncmdoa_estimate_stage(const char* scenario_dir,
                                               const char* settings_json);
/* methods: comma-separated method names. */
NCMDOA_API ncmdoa_status ncmdoa_beamform_stage(const char* scenario_dir,
                                               const char* methods,
                                               const char* settings_json,
                                               int write_filtered);
/* Relative paths in the config resolve against base_dir (may be NULL). */
NCMDOA_API ncmdoa_status ncmdoa_run(const char* run_config_json,
                                    const char* base_dir);
NCMDOA_API ncmdoa_status ncmdoa_report(const char* metrics_path,
                                       const char* group_by, char** csv);

#ifdef __cplusplus
}
#endif

#endif  /* NCMDOA_NCMDOA_H_ */
