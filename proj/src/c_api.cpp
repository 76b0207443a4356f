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

#include "ncmdoa/ncmdoa.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "ncmdoa/io_util.hpp"
#include "ncmdoa/pipeline.hpp"
#include "ncmdoa/stft.hpp"
#include "ncmdoa/variance_solver.hpp"

struct ncmdoa_array {
  ncmdoa::SensorArray array;
};

struct ncmdoa_estimate {
  ncmdoa::SensorArray array;
  ncmdoa::Doa desired;
  ncmdoa::EstimatorSettings settings;
  ncmdoa::SceneEstimates est;
};

struct ncmdoa_weights {
  ncmdoa::SensorArray array;
  ncmdoa::BeamformerWeights w;
};

namespace {

using ncmdoa::Error;
using ncmdoa::ErrorCode;

thread_local std::string last_error;

ncmdoa_status status_of(ErrorCode code) {
  return static_cast<ncmdoa_status>(static_cast<int>(code));
}

template <typename F>
ncmdoa_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return NCMDOA_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return NCMDOA_E_CONFIG;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return NCMDOA_E_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NCMDOA_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NCMDOA_E_INTERNAL;
  }
}

template <typename T>
void need(const T* p, const char* name) {
  if (p == nullptr) {
    ncmdoa::fail(ErrorCode::kInvalidArgument, std::string(name) + " is NULL");
  }
}

nlohmann::json parse_or_empty(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return nlohmann::json::object();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    ncmdoa::fail(ErrorCode::kConfig, std::string(what) + ": " + e.what());
  }
}

ncmdoa::Multichannel copy_channels(const double* const* channels,
                                   std::size_t count, std::size_t samples) {
  need(channels, "channels");
  ncmdoa::Multichannel x(count);
  for (std::size_t m = 0; m < count; ++m) {
    need(channels[m], "channel pointer");
    x[m].assign(channels[m], channels[m] + samples);
  }
  return x;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_complex(const ncmdoa::CVector& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[2 * i] = v[i].real();
    out[2 * i + 1] = v[i].imag();
  }
}

}  // namespace

extern "C" {

const char* ncmdoa_version(void) { return "1.0.0"; }

const char* ncmdoa_status_name(ncmdoa_status status) {
  switch (status) {
    case NCMDOA_OK: return "ok";
    case NCMDOA_E_INVALID_ARGUMENT: return "invalid argument";
    case NCMDOA_E_DEGENERATE_GEOMETRY: return "degenerate geometry";
    case NCMDOA_E_DEGENERATE_SYSTEM: return "degenerate system";
    case NCMDOA_E_CONSTRAINT_COLLISION: return "constraint collision";
    case NCMDOA_E_IO: return "i/o error";
    case NCMDOA_E_CONFIG: return "configuration error";
    case NCMDOA_E_NUMERIC: return "numerical failure";
    case NCMDOA_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ncmdoa_last_error(void) { return last_error.c_str(); }

void ncmdoa_free(char* text) { std::free(text); }

ncmdoa_status ncmdoa_array_create(const double* positions, size_t sensors,
                                  size_t reference, double sampling_rate,
                                  size_t frame_length, double wave_speed,
                                  ncmdoa_array** out) {
  return guarded([&] {
    need(positions, "positions");
    need(out, "out");
    std::vector<Eigen::Vector3d> p;
    for (size_t m = 0; m < sensors; ++m) {
      p.emplace_back(positions[3 * m], positions[3 * m + 1], positions[3 * m + 2]);
    }
    ncmdoa::SensorArray a(std::move(p), reference, sampling_rate, frame_length,
                          wave_speed);
    ncmdoa::relative_geometry(a);
    *out = new ncmdoa_array{std::move(a)};
  });
}

ncmdoa_status ncmdoa_array_load(const char* path, ncmdoa_array** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new ncmdoa_array{ncmdoa::SensorArray::load(path)};
  });
}

ncmdoa_status ncmdoa_array_default(ncmdoa_array** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ncmdoa_array{ncmdoa::default_array()};
  });
}

void ncmdoa_array_destroy(ncmdoa_array* array) { delete array; }

size_t ncmdoa_array_sensors(const ncmdoa_array* array) {
  return array ? array->array.size() : 0;
}

size_t ncmdoa_array_bins(const ncmdoa_array* array) {
  return array ? array->array.bin_count() : 0;
}

ncmdoa_status ncmdoa_steering_vector(const ncmdoa_array* array, double azimuth,
                                     double elevation, size_t bin, double* out) {
  return guarded([&] {
    need(array, "array");
    need(out, "out");
    ncmdoa::require(bin < array->array.bin_count(), "bin out of range");
    write_complex(ncmdoa::steering_vector(array->array,
                                          ncmdoa::Doa{azimuth, elevation}, bin),
                  out);
  });
}

ncmdoa_status ncmdoa_solve_nonnegative(const double* a, const double* q,
                                       double* sigma, unsigned* active_mask) {
  return guarded([&] {
    need(a, "a");
    need(q, "q");
    need(sigma, "sigma");
    ncmdoa::NormalSystem sys;
    for (int i = 0; i < 4; ++i) {
      sys.q[i] = q[i];
      for (int j = 0; j < 4; ++j) sys.a(i, j) = a[4 * i + j];
    }
    const auto st = ncmdoa::solve_nonnegative(sys);
    for (int i = 0; i < 4; ++i) sigma[i] = st.sigma[i];
    if (active_mask) *active_mask = st.active;
  });
}

ncmdoa_status ncmdoa_estimate_create(const ncmdoa_array* array,
                                     const double* const* channels,
                                     size_t samples, double desired_azimuth,
                                     double desired_elevation,
                                     const char* settings_json,
                                     ncmdoa_estimate** out) {
  return guarded([&] {
    need(array, "array");
    need(out, "out");
    const auto settings = ncmdoa::EstimatorSettings::from_json(
        parse_or_empty(settings_json, "settings"));
    const auto x = copy_channels(channels, array->array.size(), samples);
    const ncmdoa::Doa desired =
        ncmdoa::Doa{desired_azimuth, desired_elevation}.normalized();
    auto est = ncmdoa::estimate_scene(x, array->array, desired, settings);
    *out = new ncmdoa_estimate{array->array, desired, settings, std::move(est)};
  });
}

void ncmdoa_estimate_destroy(ncmdoa_estimate* estimate) { delete estimate; }

ncmdoa_status ncmdoa_estimate_interferer(const ncmdoa_estimate* estimate,
                                         double* azimuth, double* elevation) {
  return guarded([&] {
    need(estimate, "estimate");
    if (azimuth) *azimuth = estimate->est.ncm.interferer.azimuth;
    if (elevation) *elevation = estimate->est.ncm.interferer.elevation;
  });
}

ncmdoa_status ncmdoa_estimate_variances(const ncmdoa_estimate* estimate,
                                        double* out) {
  return guarded([&] {
    need(estimate, "estimate");
    need(out, "out");
    const auto& s = estimate->est.ncm.sigma;
    for (size_t k = 0; k < s.size(); ++k) {
      for (int z = 0; z < 4; ++z) out[4 * k + z] = s[k][z];
    }
  });
}

ncmdoa_status ncmdoa_estimate_music(const ncmdoa_estimate* estimate,
                                    double* msc_azimuth, double* wmsc_azimuth) {
  return guarded([&] {
    need(estimate, "estimate");
    if (!estimate->est.music) {
      ncmdoa::fail(ErrorCode::kNumeric, estimate->est.music_error);
    }
    if (msc_azimuth) *msc_azimuth = estimate->est.music->msc.azimuth;
    if (wmsc_azimuth) *wmsc_azimuth = estimate->est.music->wmsc.azimuth;
  });
}

ncmdoa_status ncmdoa_estimate_info(const ncmdoa_estimate* estimate,
                                   char** json) {
  return guarded([&] {
    need(estimate, "estimate");
    need(json, "json");
    const auto& n = estimate->est.ncm;
    nlohmann::json j = {
        {"interferer_azimuth_deg", ncmdoa::rad2deg(n.interferer.azimuth)},
        {"interferer_elevation_deg", ncmdoa::rad2deg(n.interferer.elevation)},
        {"cost", n.cost},
        {"iterations", n.iterations},
        {"outer_iterations", n.outer_iterations},
        {"gradient_norm", n.gradient_norm},
        {"converged", n.converged},
        {"low_confidence", n.low_confidence}};
    if (estimate->est.music) {
      j["msc_azimuth_deg"] = ncmdoa::rad2deg(estimate->est.music->msc.azimuth);
      j["wmsc_azimuth_deg"] = ncmdoa::rad2deg(estimate->est.music->wmsc.azimuth);
    }
    *json = dup_string(j.dump());
  });
}

ncmdoa_status ncmdoa_beamformer_design(const ncmdoa_estimate* estimate,
                                       const char* method,
                                       ncmdoa_weights** out) {
  return guarded([&] {
    need(estimate, "estimate");
    need(method, "method");
    need(out, "out");
    auto w = ncmdoa::design_beamformer(ncmdoa::parse_method(method),
                                       estimate->est, estimate->array,
                                       estimate->desired, estimate->settings);
    *out = new ncmdoa_weights{estimate->array, std::move(w)};
  });
}

void ncmdoa_weights_destroy(ncmdoa_weights* weights) { delete weights; }

ncmdoa_status ncmdoa_weights_get(const ncmdoa_weights* weights, size_t bin,
                                 double* out) {
  return guarded([&] {
    need(weights, "weights");
    need(out, "out");
    ncmdoa::require(bin < weights->w.h.size(), "bin out of range");
    write_complex(weights->w.h[bin], out);
  });
}

ncmdoa_status ncmdoa_weights_apply(const ncmdoa_weights* weights,
                                   const double* const* channels,
                                   size_t samples, double* out,
                                   size_t* out_samples) {
  return guarded([&] {
    need(weights, "weights");
    need(out, "out");
    const auto x = copy_channels(channels, weights->array.size(), samples);
    const auto frames =
        ncmdoa::stft(x, ncmdoa::StftConfig(weights->array.frame_length()));
    const auto y = ncmdoa::istft(ncmdoa::apply_weights(frames, weights->w.h));
    std::copy(y.begin(), y.end(), out);
    if (out_samples) *out_samples = y.size();
  });
}

ncmdoa_status ncmdoa_simulate(const char* config_json, const char* array_path,
                              const char* out_dir) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_dir, "out_dir");
    const auto j = parse_or_empty(config_json, "scenario config");
    const ncmdoa::SensorArray array =
        array_path ? ncmdoa::SensorArray::load(array_path) : ncmdoa::default_array();
    ncmdoa::ScenarioConfig cfg = ncmdoa::ScenarioConfig::from_json(j);
    if (cfg.id.empty()) cfg.id = std::filesystem::path(out_dir).filename().string();
    if (!j.contains("seed")) cfg.seed = ncmdoa::scenario_seed(1, cfg);
    ncmdoa::write_scenario(out_dir, cfg, array, ncmdoa::synthesize(cfg, array));
  });
}

ncmdoa_status ncmdoa_estimate_stage(const char* scenario_dir,
                                    const char* settings_json) {
  return guarded([&] {
    need(scenario_dir, "scenario_dir");
    ncmdoa::estimate_stage(scenario_dir,
                           ncmdoa::EstimatorSettings::from_json(
                               parse_or_empty(settings_json, "settings")));
  });
}

ncmdoa_status ncmdoa_beamform_stage(const char* scenario_dir,
                                    const char* methods,
                                    const char* settings_json,
                                    int write_filtered) {
  return guarded([&] {
    need(scenario_dir, "scenario_dir");
    std::vector<ncmdoa::Method> list;
    if (methods == nullptr || std::string(methods) == "all") {
      list = ncmdoa::all_methods();
    } else {
      std::stringstream ss(methods);
      std::string name;
      while (std::getline(ss, name, ',')) {
        if (!name.empty()) list.push_back(ncmdoa::parse_method(name));
      }
    }
    if (list.empty()) ncmdoa::fail(ErrorCode::kConfig, "no methods selected");
    ncmdoa::beamform_stage(scenario_dir, list,
                           ncmdoa::EstimatorSettings::from_json(
                               parse_or_empty(settings_json, "settings")),
                           write_filtered != 0);
  });
}

ncmdoa_status ncmdoa_run(const char* run_config_json, const char* base_dir) {
  return guarded([&] {
    need(run_config_json, "run_config_json");
    const auto cfg = ncmdoa::RunConfig::from_json(
        parse_or_empty(run_config_json, "run config"),
        base_dir ? std::filesystem::path(base_dir) : std::filesystem::path());
    ncmdoa::run_pipeline(cfg);
  });
}

ncmdoa_status ncmdoa_report(const char* metrics_path, const char* group_by,
                            char** csv) {
  return guarded([&] {
    need(metrics_path, "metrics_path");
    need(group_by, "group_by");
    need(csv, "csv");
    *csv = dup_string(
        ncmdoa::boxplot_report(ncmdoa::read_text(metrics_path), group_by));
  });
}

}  // extern "C"
