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

#ifndef NCMDOA_PIPELINE_HPP_
#define NCMDOA_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncmdoa/beamformers.hpp"
#include "ncmdoa/doa_estimator.hpp"
#include "ncmdoa/error.hpp"
#include "ncmdoa/metrics.hpp"
#include "ncmdoa/music.hpp"
#include "ncmdoa/scenario.hpp"

namespace ncmdoa {

enum class Method { kNcmLcmv, kNcmMvdr, kMusicLcmp, kMsc, kWmsc };

std::string to_string(Method method);
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();
// True for methods that produce weights, false for DoA-only baselines.
bool is_beamformer(Method method);

struct EstimatorSettings {
  DescentConfig descent;
  double epsilon = kDefaultEpsilon;
  MusicConfig music;
  CollisionPolicy collision = CollisionPolicy::kFallbackToMvdr;

  nlohmann::json to_json() const;
  static EstimatorSettings from_json(const nlohmann::json& doc);
};

// Versioned run description. Either a preset or an inline scenario list.
struct RunConfig {
  static constexpr int kSchema = 1;

  std::optional<std::filesystem::path> array_path;
  std::string preset;
  std::vector<ScenarioConfig> scenarios;
  EstimatorSettings estimator;
  std::vector<Method> methods = all_methods();
  std::filesystem::path output = "runs";
  std::uint64_t master_seed = 1;
  // 0: NCMDOA_WORKERS, else 1.
  int workers = 0;
  bool write_filtered = true;
  // Overrides every scenario duration when set.
  std::optional<double> duration;

  // Relative paths resolve against base_dir.
  static RunConfig from_json(const nlohmann::json& doc,
                             const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
  void validate() const;

  SensorArray array() const;
  // Preset or inline scenarios with seeds, ids and duration filled in.
  std::vector<ScenarioConfig> resolved_scenarios() const;
  int worker_count() const;
};

// 4x4 URA, 2 cm pitch, 16 kHz, 128-point frames.
SensorArray default_array();

// In-memory stages.

struct SceneEstimates {
  BinMatrices ry;
  JointEstimate ncm;
  std::optional<MusicResult> music;
  std::string music_error;
};

SceneEstimates estimate_scene(const Multichannel& mixture,
                              const SensorArray& array, const Doa& desired,
                              const EstimatorSettings& settings,
                              const TraceSink& trace = {});

// DoA a method reports; nullopt when its estimate failed.
std::optional<Doa> method_doa(Method method, const SceneEstimates& est);

BeamformerWeights design_beamformer(Method method, const SceneEstimates& est,
                                    const SensorArray& array,
                                    const Doa& desired,
                                    const EstimatorSettings& settings);

struct FilteredScene {
  MetricSignals reference;
  MetricSignals filtered;
  std::vector<double> mixture;
  std::size_t margin = 0;
};

// Applies the same weights to every component separately.
FilteredScene filter_scene(const BeamformerWeights& w,
                           const ScenarioSignals& sig,
                           const SensorArray& array);

EnhancementReport evaluate(const BeamformerWeights& w,
                           const ScenarioSignals& sig, const SensorArray& array,
                           FilteredScene* filtered = nullptr);

// Persisted stages. A scenario directory holds manifest.json, array.json
// and components/<name>.wav; estimation writes estimates.json,
// estimates.jsonl and ncm.{bin,json}; beamforming writes
// weights/<method>.{bin,json}, filtered/<method>.wav and metrics.csv.

struct MetricsRow {
  ScenarioConfig config;
  Method method = Method::kNcmLcmv;
  std::optional<double> doa_deg;
  std::optional<double> angular_error_deg;
  std::optional<EnhancementReport> report;
  std::vector<std::string> flags;
};

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);

struct StoredScenario {
  std::filesystem::path dir;
  nlohmann::json manifest;
  ScenarioConfig config;
  SensorArray array;
  Doa desired;
  Doa interferer;
  // Components that were not stored are left empty.
  ScenarioSignals signals;
};

void write_scenario(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                    const SensorArray& array, const ScenarioSignals& sig);
StoredScenario load_scenario(const std::filesystem::path& dir);

nlohmann::json estimate_stage(const std::filesystem::path& dir,
                              const EstimatorSettings& settings);

std::vector<MetricsRow> beamform_stage(const std::filesystem::path& dir,
                                       const std::vector<Method>& methods,
                                       const EstimatorSettings& settings,
                                       bool write_filtered = true);

// Simulates, estimates and beamforms every scenario, then writes
// <output>/metrics.csv and <output>/run.json. Stage failures raise
// StageError naming the scenario.
void run_pipeline(const RunConfig& cfg);

class StageError : public Error {
 public:
  StageError(const std::string& scenario, const Error& cause)
      : Error(cause.code(), "scenario " + scenario + ": " + cause.what()),
        scenario_(scenario) {}
  const std::string& scenario() const { return scenario_; }

 private:
  std::string scenario_;
};

}  // namespace ncmdoa

#endif  // NCMDOA_PIPELINE_HPP_
