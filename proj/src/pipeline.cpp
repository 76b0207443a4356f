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

#include "ncmdoa/pipeline.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <set>
#include <thread>

#include "ncmdoa/covariance.hpp"
#include "ncmdoa/io_util.hpp"
#include "ncmdoa/stft.hpp"
#include "ncmdoa/wav_io.hpp"

namespace ncmdoa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::kConfig, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      fail(ErrorCode::kConfig, where + ": unknown key '" + key + "'");
    }
  }
}

json doa_json(const Doa& d) {
  return {{"azimuth_deg", rad2deg(d.azimuth)},
          {"elevation_deg", rad2deg(d.elevation)}};
}

Doa doa_from_json(const json& j) {
  return Doa::from_degrees(j.at("azimuth_deg").get<double>(),
                           j.value("elevation_deg", 0.0));
}

json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kNcmLcmv: return "ncm-lcmv";
    case Method::kNcmMvdr: return "ncm-mvdr";
    case Method::kMusicLcmp: return "music-lcmp";
    case Method::kMsc: return "msc";
    case Method::kWmsc: return "wmsc";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorCode::kConfig, "unknown method '" + name +
                               "' (ncm-lcmv|ncm-mvdr|music-lcmp|msc|wmsc)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = {Method::kNcmLcmv, Method::kNcmMvdr,
                                          Method::kMusicLcmp, Method::kMsc,
                                          Method::kWmsc};
  return all;
}

bool is_beamformer(Method method) {
  return method == Method::kNcmLcmv || method == Method::kNcmMvdr ||
         method == Method::kMusicLcmp;
}

json EstimatorSettings::to_json() const {
  json offsets = json::array();
  for (double o : descent.start_offsets) offsets.push_back(rad2deg(o));
  json j = {{"epsilon", epsilon},
            {"gradient_form", ncmdoa::to_string(descent.form)},
            {"multi_starts", descent.multi_starts},
            {"start_offsets_deg", offsets},
            {"step", descent.step},
            {"contraction", descent.contraction},
            {"armijo", descent.armijo},
            {"min_step", descent.min_step},
            {"max_iterations", descent.max_iterations},
            {"tol_grad", descent.tol_grad},
            {"exclusion_deg", rad2deg(descent.exclusion)},
            {"inner_steps", descent.inner_steps},
            {"max_outer", descent.max_outer},
            {"collision", collision == CollisionPolicy::kThrow ? "throw" : "fallback"},
            {"music",
             {{"grid_step_deg", rad2deg(music.grid_step)},
              {"sources", music.sources},
              {"separation_deg", rad2deg(music.separation)},
              {"min_frequency_hz", music.min_frequency},
              {"elevation_deg", rad2deg(music.elevation)}}}};
  if (descent.initial) j["initial"] = doa_json(*descent.initial);
  if (descent.estimate_elevation) j["estimate_elevation"] = *descent.estimate_elevation;
  return j;
}

EstimatorSettings EstimatorSettings::from_json(const json& j) {
  check_keys(j,
             {"epsilon", "gradient_form", "multi_starts", "start_offsets_deg",
              "initial", "step", "contraction", "armijo", "min_step",
              "max_iterations", "tol_grad", "exclusion_deg", "inner_steps",
              "max_outer", "collision", "music", "estimate_elevation"},
             "estimator");
  EstimatorSettings s;
  auto& d = s.descent;
  try {
    s.epsilon = j.value("epsilon", s.epsilon);
    if (j.contains("gradient_form")) {
      d.form = parse_gradient_form(j.at("gradient_form").get<std::string>());
    }
    d.multi_starts = j.value("multi_starts", d.multi_starts);
    if (j.contains("start_offsets_deg")) {
      d.start_offsets.clear();
      for (double o : j.at("start_offsets_deg")) d.start_offsets.push_back(deg2rad(o));
    }
    if (j.contains("initial")) d.initial = doa_from_json(j.at("initial"));
    d.step = j.value("step", d.step);
    d.contraction = j.value("contraction", d.contraction);
    d.armijo = j.value("armijo", d.armijo);
    d.min_step = j.value("min_step", d.min_step);
    d.max_iterations = j.value("max_iterations", d.max_iterations);
    d.tol_grad = j.value("tol_grad", d.tol_grad);
    if (j.contains("exclusion_deg")) d.exclusion = deg2rad(j.at("exclusion_deg").get<double>());
    d.inner_steps = j.value("inner_steps", d.inner_steps);
    d.max_outer = j.value("max_outer", d.max_outer);
    if (j.contains("estimate_elevation")) {
      d.estimate_elevation = j.at("estimate_elevation").get<bool>();
    }
    if (j.contains("collision")) {
      const auto c = j.at("collision").get<std::string>();
      if (c == "throw") {
        s.collision = CollisionPolicy::kThrow;
      } else if (c == "fallback") {
        s.collision = CollisionPolicy::kFallbackToMvdr;
      } else {
        fail(ErrorCode::kConfig, "collision must be throw|fallback");
      }
    }
    if (j.contains("music")) {
      const auto& m = j.at("music");
      check_keys(m, {"grid_step_deg", "sources", "separation_deg",
                     "min_frequency_hz", "elevation_deg"},
                 "estimator.music");
      if (m.contains("grid_step_deg")) s.music.grid_step = deg2rad(m.at("grid_step_deg").get<double>());
      s.music.sources = m.value("sources", s.music.sources);
      if (m.contains("separation_deg")) s.music.separation = deg2rad(m.at("separation_deg").get<double>());
      s.music.min_frequency = m.value("min_frequency_hz", s.music.min_frequency);
      if (m.contains("elevation_deg")) s.music.elevation = deg2rad(m.at("elevation_deg").get<double>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("estimator settings: ") + e.what());
  }
  if (!(s.epsilon > 0.0)) fail(ErrorCode::kConfig, "epsilon must be positive");
  if (d.multi_starts < 1 || d.max_iterations < 1 || d.inner_steps < 1 ||
      d.max_outer < 1) {
    fail(ErrorCode::kConfig, "iteration counts must be positive");
  }
  if (!(d.step > 0.0) || !(d.contraction > 0.0 && d.contraction < 1.0)) {
    fail(ErrorCode::kConfig, "step must be positive and contraction in (0, 1)");
  }
  if (!(s.music.grid_step > 0.0) || s.music.sources < 1) {
    fail(ErrorCode::kConfig, "music grid step and source count must be positive");
  }
  return s;
}

SensorArray default_array() {
  return SensorArray::uniform_rectangular(4, 4, 0.02, 16000.0, 128);
}

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  check_keys(j,
             {"schema", "array", "preset", "scenarios", "estimator", "methods",
              "output", "master_seed", "workers", "write_filtered",
              "duration_s"},
             "run config");
  RunConfig c;
  try {
    const int schema = j.value("schema", kSchema);
    if (schema != kSchema) {
      fail(ErrorCode::kConfig, "unsupported run config schema " + std::to_string(schema));
    }
    const auto resolve = [&](const std::string& p) {
      fs::path path(p);
      return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    if (j.contains("array")) c.array_path = resolve(j.at("array").get<std::string>());
    c.preset = j.value("preset", c.preset);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("scenarios")) {
      int index = 0;
      for (const auto& s : j.at("scenarios")) {
        ScenarioConfig sc = ScenarioConfig::from_json(s);
        if (sc.id.empty()) {
          char id[32];
          std::snprintf(id, sizeof id, "scenario-%03d", index);
          sc.id = id;
        }
        if (!s.contains("seed")) sc.seed = scenario_seed(c.master_seed, sc);
        c.scenarios.push_back(sc);
        ++index;
      }
    }
    if (j.contains("estimator")) c.estimator = EstimatorSettings::from_json(j.at("estimator"));
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("output")) c.output = resolve(j.at("output").get<std::string>());
    c.workers = j.value("workers", c.workers);
    c.write_filtered = j.value("write_filtered", c.write_filtered);
    if (j.contains("duration_s")) c.duration = j.at("duration_s").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json j = {{"schema", kSchema},
            {"estimator", estimator.to_json()},
            {"output", output.string()},
            {"master_seed", master_seed},
            {"workers", workers},
            {"write_filtered", write_filtered}};
  if (array_path) j["array"] = array_path->string();
  if (!preset.empty()) j["preset"] = preset;
  if (!scenarios.empty()) {
    j["scenarios"] = json::array();
    for (const auto& s : scenarios) j["scenarios"].push_back(s.to_json());
  }
  j["methods"] = json::array();
  for (Method m : methods) j["methods"].push_back(to_string(m));
  if (duration) j["duration_s"] = *duration;
  return j;
}

void RunConfig::validate() const {
  if (preset.empty() == scenarios.empty()) {
    fail(ErrorCode::kConfig, "run config needs exactly one of preset or scenarios");
  }
  if (methods.empty()) fail(ErrorCode::kConfig, "run config selects no methods");
  if (array_path && !fs::exists(*array_path)) {
    fail(ErrorCode::kConfig, "array geometry not found: " + array_path->string());
  }
  if (workers < 0) fail(ErrorCode::kConfig, "workers must be non-negative");
  if (duration && !(*duration > 0.0)) fail(ErrorCode::kConfig, "duration_s must be positive");
  if (!preset.empty()) scenario_grid(preset, master_seed);
}

SensorArray RunConfig::array() const {
  return array_path ? SensorArray::load(*array_path) : default_array();
}

std::vector<ScenarioConfig> RunConfig::resolved_scenarios() const {
  auto out = preset.empty() ? scenarios : scenario_grid(preset, master_seed);
  if (duration) {
    for (auto& s : out) s.duration = *duration;
  }
  return out;
}

int RunConfig::worker_count() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("NCMDOA_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1 || n > 1024) {
      fail(ErrorCode::kConfig, std::string("NCMDOA_WORKERS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(n);
  }
  return 1;
}

SceneEstimates estimate_scene(const Multichannel& mixture,
                              const SensorArray& array, const Doa& desired,
                              const EstimatorSettings& settings,
                              const TraceSink& trace) {
  require(mixture.size() == array.size(),
          "mixture channel count does not match the array");
  SceneEstimates est;
  est.ry = sample_covariance(stft(mixture, StftConfig(array.frame_length())));
  DoaProblem problem(array, est.ry, desired, settings.epsilon);
  est.ncm = joint_estimate(problem, settings.descent, trace);
  try {
    est.music = music_doa(est.ry, array, desired.azimuth, settings.music);
  } catch (const Error& e) {
    est.music_error = e.what();
  }
  return est;
}

std::optional<Doa> method_doa(Method method, const SceneEstimates& est) {
  switch (method) {
    case Method::kNcmLcmv:
    case Method::kNcmMvdr:
      return est.ncm.interferer;
    case Method::kMusicLcmp:
    case Method::kMsc:
      if (!est.music) return std::nullopt;
      return Doa{est.music->msc.azimuth, 0.0};
    case Method::kWmsc:
      if (!est.music) return std::nullopt;
      return Doa{est.music->wmsc.azimuth, 0.0};
  }
  return std::nullopt;
}

BeamformerWeights design_beamformer(Method method, const SceneEstimates& est,
                                    const SensorArray& array,
                                    const Doa& desired,
                                    const EstimatorSettings& settings) {
  require(is_beamformer(method), to_string(method) + " is not a beamformer");
  BeamformerOptions opts;
  opts.collision = settings.collision;
  opts.epsilon = settings.epsilon;
  const BinVectors d = steering_vectors(array, desired);
  if (method == Method::kNcmMvdr) return mvdr(est.ncm.ncm, d, opts);
  const auto doa = method_doa(method, est);
  if (!doa) fail(ErrorCode::kNumeric, "no MUSIC estimate: " + est.music_error);
  Doa b = *doa;
  if (method == Method::kMusicLcmp) b.elevation = settings.music.elevation;
  const ConstraintSet cs{d, steering_vectors(array, b)};
  if (method == Method::kNcmLcmv) return lcmv(est.ncm.ncm, cs, opts);
  return lcmp(est.ry, cs, opts);
}

namespace {

SpectralFrames frames_of(const Multichannel& x, const SensorArray& array,
                         const std::string& name) {
  if (x.empty()) {
    fail(ErrorCode::kInvalidArgument,
         "scenario lacks the '" + name + "' component needed for metrics");
  }
  return stft(x, StftConfig(array.frame_length()));
}

std::vector<double> reference_view(const Multichannel& x, std::size_t ref,
                                   std::size_t length) {
  std::vector<double> out(x[ref].begin(),
                          x[ref].begin() + static_cast<std::ptrdiff_t>(length));
  return out;
}

}  // namespace

FilteredScene filter_scene(const BeamformerWeights& w,
                           const ScenarioSignals& sig,
                           const SensorArray& array) {
  SpectralFrames xd = frames_of(sig.desired_direct, array, "desired_direct");
  SpectralFrames pd = frames_of(sig.interferer_direct, array, "interferer_direct");
  SpectralFrames p = pd;
  p += frames_of(sig.interferer_reverb, array, "interferer_reverb");
  SpectralFrames eta = p;
  eta += frames_of(sig.desired_reverb, array, "desired_reverb");
  eta += frames_of(sig.correlated, array, "correlated");
  eta += frames_of(sig.white, array, "white");
  SpectralFrames y = xd;
  y += eta;

  const auto run = [&](const SpectralFrames& f) {
    return istft(apply_weights(f, w.h));
  };
  FilteredScene out;
  out.filtered.desired = run(xd);
  out.filtered.interferer_direct = run(pd);
  out.filtered.interferer = run(p);
  out.filtered.noise = run(eta);
  out.mixture = run(y);
  const std::size_t length = out.filtered.desired.size();
  const std::size_t ref = array.reference();
  out.reference.desired = reference_view(sig.desired_direct, ref, length);
  out.reference.interferer_direct = reference_view(sig.interferer_direct, ref, length);
  const Multichannel p_t = sig.interferer_total();
  out.reference.interferer = reference_view(p_t, ref, length);
  const Multichannel eta_t = sig.noise();
  out.reference.noise = reference_view(eta_t, ref, length);
  out.margin = array.frame_length();
  return out;
}

EnhancementReport evaluate(const BeamformerWeights& w,
                           const ScenarioSignals& sig, const SensorArray& array,
                           FilteredScene* filtered) {
  FilteredScene scene = filter_scene(w, sig, array);
  EnhancementReport r =
      enhancement_metrics(scene.reference, scene.filtered, scene.margin);
  const TheoreticalMetrics t = theoretical_metrics(w.h, array);
  r.df_db = to_db(t.df);
  r.wng_db = to_db(t.wng);
  if (filtered) *filtered = std::move(scene);
  return r;
}

std::string metrics_header() {
  return "scenario,t60_ms,dx_m,dp_m,sir_db,scr_db,theta_b_deg,seed,method,"
         "doa_deg,angular_error_deg,gsnr_db,gsir_db,isrf_db,dsrf_db,df_db,"
         "wng_db,flags\n";
}

std::string format_metrics_row(const MetricsRow& row) {
  const auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  const auto opt = [&](const std::optional<double>& v) {
    return v ? num(*v) : std::string();
  };
  const auto& c = row.config;
  char seed[32];
  std::snprintf(seed, sizeof seed, "%llu", static_cast<unsigned long long>(c.seed));
  std::string s = c.id + "," + num(c.t60_ms) + "," + num(c.dx) + "," +
                  num(c.dp) + "," + num(c.sir_db) + "," + num(c.scr_db) + "," +
                  num(c.theta_b_deg) + "," + seed + "," + to_string(row.method) +
                  "," + opt(row.doa_deg) + "," + opt(row.angular_error_deg);
  if (row.report) {
    const auto& r = *row.report;
    for (double v : {r.gsnr_db, r.gsir_db, r.isrf_db, r.dsrf_db, r.df_db, r.wng_db}) {
      s += "," + num(clip_db(v));
    }
  } else {
    s += ",,,,,,";
  }
  s += ",";
  for (std::size_t i = 0; i < row.flags.size(); ++i) {
    if (i) s += ";";
    s += row.flags[i];
  }
  return s + "\n";
}

void write_scenario(const fs::path& dir, const ScenarioConfig& cfg,
                    const SensorArray& array, const ScenarioSignals& sig) {
  fs::create_directories(dir / "components");
  json names = json::array();
  for (const auto& name : ScenarioSignals::component_names()) {
    const Multichannel& x = sig.component(name);
    if (x.empty()) continue;
    const fs::path path = dir / "components" / (name + ".wav");
    const fs::path tmp = dir / "components" / (name + ".wav.tmp");
    write_wav(tmp, x, sig.sampling_rate);
    fs::rename(tmp, path);
    names.push_back(name);
  }
  write_text_atomic(dir / "array.json", array.to_json().dump(2) + "\n");
  const json manifest = {
      {"schema", 1},
      {"scenario", cfg.to_json()},
      {"truth",
       {{"desired", doa_json(sig.desired)},
        {"interferer", doa_json(sig.interferer)},
        {"desired_position_m", vec_json(sig.desired_position)},
        {"interferer_position_m", vec_json(sig.interferer_position)}}},
      {"achieved", sig.achieved},
      {"sampling_rate", sig.sampling_rate},
      {"samples", sig.samples()},
      {"components", names}};
  write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

StoredScenario load_scenario(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) {
    fail(ErrorCode::kIo, "no manifest.json in " + dir.string());
  }
  StoredScenario s{dir,  read_json(dir / "manifest.json"), {},
                   SensorArray::load(dir / "array.json"), {}, {}, {}};
  try {
    s.config = ScenarioConfig::from_json(s.manifest.at("scenario"));
    s.desired = doa_from_json(s.manifest.at("truth").at("desired"));
    s.interferer = doa_from_json(s.manifest.at("truth").at("interferer"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, "malformed manifest in " + dir.string() + ": " + e.what());
  }
  auto& sig = s.signals;
  sig.sampling_rate = s.array.sampling_rate();
  sig.desired = s.desired;
  sig.interferer = s.interferer;
  for (const auto& name : ScenarioSignals::component_names()) {
    const fs::path path = dir / "components" / (name + ".wav");
    if (!fs::exists(path)) continue;
    WavData w = read_wav(path, s.array.sampling_rate());
    if (w.channels.size() != s.array.size()) {
      fail(ErrorCode::kInvalidArgument,
           path.string() + " has " + std::to_string(w.channels.size()) +
               " channels, array has " + std::to_string(s.array.size()));
    }
    sig.component(name) = std::move(w.channels);
  }
  if (sig.mixture.empty()) {
    // External imports may ship only the separated components.
    for (const auto& name : ScenarioSignals::component_names()) {
      const auto& x = sig.component(name);
      if (name == "mixture" || x.empty()) continue;
      if (sig.mixture.empty()) {
        sig.mixture = x;
        continue;
      }
      require(x.front().size() == sig.mixture.front().size(),
              "component lengths differ in " + dir.string());
      for (std::size_t m = 0; m < x.size(); ++m) {
        for (std::size_t n = 0; n < x[m].size(); ++n) sig.mixture[m][n] += x[m][n];
      }
    }
  }
  if (sig.mixture.empty()) fail(ErrorCode::kIo, "no audio components in " + dir.string());
  // Missing components read as silence so metrics still see every term.
  const std::size_t len = sig.mixture.front().size();
  for (const auto& name : {"desired_reverb", "interferer_reverb", "correlated", "white"}) {
    auto& x = sig.component(name);
    if (x.empty()) x.assign(s.array.size(), std::vector<double>(len, 0.0));
  }
  return s;
}

json estimate_stage(const fs::path& dir, const EstimatorSettings& settings) {
  const StoredScenario s = load_scenario(dir);
  std::string trace;
  const auto sink = [&](const json& j) { trace += j.dump() + "\n"; };
  const SceneEstimates est =
      estimate_scene(s.signals.mixture, s.array, s.desired, settings, sink);
  write_text_atomic(dir / "estimates.jsonl", trace);
  export_matrices(dir / "ncm", est.ncm.ncm, "ncm");
  export_matrices(dir / "ry", est.ry, "observed");
  json sigma = json::array();
  for (const auto& v : est.ncm.sigma) sigma.push_back({v[0], v[1], v[2], v[3]});
  json j = {{"desired", doa_json(s.desired)},
            {"ncm",
             {{"interferer", doa_json(est.ncm.interferer)},
              {"start", doa_json(est.ncm.start)},
              {"cost", est.ncm.cost},
              {"iterations", est.ncm.iterations},
              {"outer_iterations", est.ncm.outer_iterations},
              {"gradient_norm", est.ncm.gradient_norm},
              {"converged", est.ncm.converged},
              {"low_confidence", est.ncm.low_confidence},
              {"sigma", sigma}}},
            {"settings", settings.to_json()}};
  if (est.music) {
    j["msc"] = {{"azimuth_deg", rad2deg(est.music->msc.azimuth)}};
    j["wmsc"] = {{"azimuth_deg", rad2deg(est.music->wmsc.azimuth)}};
    export_spectra_csv(dir / "music_spectra.csv", est.music->spectra);
  } else {
    j["msc"] = nullptr;
    j["wmsc"] = nullptr;
    j["music_error"] = est.music_error;
  }
  write_text_atomic(dir / "estimates.json", j.dump(2) + "\n");
  return j;
}

std::vector<MetricsRow> beamform_stage(const fs::path& dir,
                                       const std::vector<Method>& methods,
                                       const EstimatorSettings& settings,
                                       bool write_filtered) {
  require(!methods.empty(), "no methods selected");
  const StoredScenario s = load_scenario(dir);
  if (!fs::exists(dir / "estimates.json")) {
    fail(ErrorCode::kIo, "no estimates.json in " + dir.string() + "; run estimate first");
  }
  const json e = read_json(dir / "estimates.json");
  SceneEstimates est;
  bool low_confidence = false, converged = true;
  try {
    est.ry = import_matrices(dir / "ry");
    est.ncm.ncm = import_matrices(dir / "ncm");
    est.ncm.interferer = doa_from_json(e.at("ncm").at("interferer"));
    low_confidence = e.at("ncm").at("low_confidence").get<bool>();
    converged = e.at("ncm").at("converged").get<bool>();
    if (!e.at("msc").is_null()) {
      MusicResult m;
      m.msc.azimuth = deg2rad(e.at("msc").at("azimuth_deg").get<double>());
      m.wmsc.azimuth = deg2rad(e.at("wmsc").at("azimuth_deg").get<double>());
      est.music = m;
    } else {
      est.music_error = e.value("music_error", std::string("unavailable"));
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kConfig, "malformed estimates.json in " + dir.string() + ": " + ex.what());
  }

  std::vector<MetricsRow> rows;
  for (Method m : methods) {
    MetricsRow row;
    row.config = s.config;
    row.method = m;
    const auto doa = method_doa(m, est);
    const bool ncm_method = m == Method::kNcmLcmv || m == Method::kNcmMvdr;
    if (ncm_method && low_confidence) row.flags.push_back("low_confidence");
    if (ncm_method && !converged) row.flags.push_back("unconverged");
    if (doa) {
      row.doa_deg = rad2deg(doa->azimuth);
      row.angular_error_deg = angular_error_deg(*doa, s.interferer);
    } else {
      row.flags.push_back("no_estimate");
    }
    if (is_beamformer(m) && (doa || m == Method::kNcmMvdr)) {
      const BeamformerWeights w = design_beamformer(m, est, s.array, s.desired, settings);
      export_weights(dir / "weights" / to_string(m), w);
      FilteredScene filtered;
      row.report = evaluate(w, s.signals, s.array, &filtered);
      if (write_filtered) {
        fs::create_directories(dir / "filtered");
        const fs::path path = dir / "filtered" / (to_string(m) + ".wav");
        const fs::path tmp = dir / "filtered" / (to_string(m) + ".wav.tmp");
        write_wav(tmp, Multichannel{filtered.mixture}, s.array.sampling_rate());
        fs::rename(tmp, path);
      }
      // The DC bin always collides (every steering entry is 1); only
      // report drops elsewhere.
      if (m != Method::kNcmMvdr &&
          std::find(w.null_applied.begin() + 1, w.null_applied.end(), false) !=
              w.null_applied.end()) {
        row.flags.push_back("null_dropped");
      }
      if (std::find(w.loaded.begin(), w.loaded.end(), true) != w.loaded.end()) {
        row.flags.push_back("loaded");
      }
      if (row.report->infinite) row.flags.push_back("infinite");
    }
    rows.push_back(std::move(row));
  }
  std::string csv = metrics_header();
  for (const auto& r : rows) csv += format_metrics_row(r);
  write_text_atomic(dir / "metrics.csv", csv);
  return rows;
}

void run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const SensorArray array = cfg.array();
  const auto scenarios = cfg.resolved_scenarios();
  const int workers = std::min<int>(cfg.worker_count(), static_cast<int>(scenarios.size()));
  fs::create_directories(cfg.output);

  std::vector<std::vector<MetricsRow>> rows(scenarios.size());
  std::vector<std::optional<StageError>> errors(scenarios.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      const auto& sc = scenarios[i];
      const fs::path dir = cfg.output / "scenarios" / sc.id;
      try {
        try {
          write_scenario(dir, sc, array, synthesize(sc, array));
          estimate_stage(dir, cfg.estimator);
          rows[i] = beamform_stage(dir, cfg.methods, cfg.estimator, cfg.write_filtered);
        } catch (const Error&) {
          throw;
        } catch (const fs::filesystem_error& e) {
          throw Error(ErrorCode::kIo, e.what());
        } catch (const std::exception& e) {
          throw Error(ErrorCode::kNumeric, e.what());
        }
      } catch (const Error& e) {
        errors[i].emplace(sc.id, e);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) throw *e;
  }
  std::string csv = metrics_header();
  for (const auto& per : rows) {
    for (const auto& r : per) csv += format_metrics_row(r);
  }
  write_text_atomic(cfg.output / "metrics.csv", csv);
  json run = cfg.to_json();
  run["scenario_count"] = scenarios.size();
  write_text_atomic(cfg.output / "run.json", run.dump(2) + "\n");
}

}  // namespace ncmdoa
