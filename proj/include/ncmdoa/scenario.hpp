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

#ifndef NCMDOA_SCENARIO_HPP_
#define NCMDOA_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/sources.hpp"
#include "ncmdoa/types.hpp"

namespace ncmdoa {

enum class Propagation { kPlane, kSpherical };

std::string to_string(Propagation p);
Propagation parse_propagation(const std::string& name);

struct ScenarioConfig {
  std::string id;
  // Reverberation proxy: 0 renders no diffuse field.
  double t60_ms = 0.0;
  double dx = 1.5;
  double dp = 1.5;
  double theta_b_deg = 50.0;
  double theta_d_deg = 0.0;
  double sir_db = 0.0;
  double scr_db = 5.0;
  // White sensor noise relative to the desired direct path.
  double snr_db = 30.0;
  double duration = 3.0;
  std::uint64_t seed = 0;
  Propagation propagation = Propagation::kSpherical;
  SourceSpec desired_source = SourceSpec::speech(Voice::kLow);
  SourceSpec interferer_source = SourceSpec::speech(Voice::kHigh);
  // Number of correlated ring sources (0 disables them).
  int ring_sources = 8;
  double ring_radius = 1.0;

  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& doc);
  void validate() const;
};

// Diffuse-to-direct energy ratio in dB for the reverberation proxy at the
// given source distance; -inf for t60 = 0.
double diffuse_to_direct_db(double t60_ms, double distance);

struct ScenarioSignals {
  double sampling_rate = 16000.0;
  Multichannel desired_direct;
  Multichannel desired_reverb;
  Multichannel interferer_direct;
  Multichannel interferer_reverb;
  Multichannel correlated;
  Multichannel white;
  Multichannel mixture;
  Doa desired;
  Doa interferer;
  Eigen::Vector3d desired_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d interferer_position = Eigen::Vector3d::Zero();
  // Relative frequency responses of the direct paths at the STFT bins.
  BinVectors desired_rfr;
  BinVectors interferer_rfr;
  nlohmann::json achieved;

  // Diffuse residual: both reverberant tails plus the ring sources.
  Multichannel gamma() const;
  Multichannel interferer_total() const;
  // Everything but the desired direct path.
  Multichannel noise() const;
  std::size_t samples() const;

  static const std::vector<std::string>& component_names();
  const Multichannel& component(const std::string& name) const;
  Multichannel& component(const std::string& name);
};

ScenarioSignals synthesize(const ScenarioConfig& cfg, const SensorArray& array);

// Spherically isotropic noise with unit variance per channel. Channels are
// mixed per frequency with the real square root of the sinc coherence.
Multichannel diffuse_field(std::span<const Eigen::Vector3d> positions,
                           double sampling_rate, std::size_t samples,
                           std::uint64_t seed, double wave_speed = 343.0);

// Mean square over the whole signal.
double signal_power(std::span<const double> x);

// Presets: "table1-full" (1458), "table1-reduced" (288), "table1-mini" (3).
// Seeds are derived from the master seed and a hash of each config.
std::vector<ScenarioConfig> scenario_grid(const std::string& preset,
                                          std::uint64_t master_seed);

std::uint64_t scenario_seed(std::uint64_t master_seed, const ScenarioConfig& cfg);

// Renders configs in order, handing each to `fn`.
void sweep(const std::vector<ScenarioConfig>& grid, const SensorArray& array,
           const std::function<void(const ScenarioConfig&,
                                    const ScenarioSignals&)>& fn);

}  // namespace ncmdoa

#endif  // NCMDOA_SCENARIO_HPP_
