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

// Command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncmdoa/ncmdoa.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStage = 2;

struct ConfigError {
  std::string what;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError{"cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report_status(ncmdoa_status s) {
  if (s == NCMDOA_OK) return kExitOk;
  std::cerr << "ncmdoa: " << ncmdoa_status_name(s) << ": " << ncmdoa_last_error()
            << "\n";
  return s == NCMDOA_E_CONFIG ? kExitConfig : kExitStage;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interferer DoA estimation and beamforming toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ncmdoa_version()));

  std::string config, out, array, scenario, settings, metrics, group_by, preset;
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
  double duration = 0.0;
  int workers = 0;
  bool no_filtered = false;

  auto* simulate = app.add_subcommand("simulate", "Render one scenario to a directory");
  simulate->add_option("--config", config, "Scenario JSON")->required();
  simulate->add_option("--out", out, "Scenario directory")->required();
  simulate->add_option("--array", array, "Array geometry JSON");

  auto* estimate = app.add_subcommand("estimate", "Estimate the interferer DoA and NCM");
  estimate->add_option("--scenario", scenario, "Scenario directory")->required();
  estimate->add_option("--settings", settings, "Estimator settings JSON");

  auto* beamform = app.add_subcommand("beamform", "Design beamformers and score them");
  beamform->add_option("--scenario", scenario, "Scenario directory")->required();
  beamform->add_option("--method", methods,
                       "ncm-lcmv|ncm-mvdr|music-lcmp|msc|wmsc|all (repeatable)");
  beamform->add_option("--settings", settings, "Estimator settings JSON");
  beamform->add_flag("--no-filtered", no_filtered, "Skip filtered WAV output");

  auto* report = app.add_subcommand("report", "Boxplot statistics from a metrics CSV");
  report->add_option("--metrics", metrics, "metrics.csv")->required();
  report->add_option("--group-by", group_by,
                     "t60|dx|dp|sir|scr|theta_b or a column name")->required();
  report->add_option("--out", out, "Output CSV (stdout when omitted)");

  auto* sweep = app.add_subcommand("sweep", "Run every stage over a preset grid");
  sweep->add_option("--preset", preset, "table1-full|table1-reduced|table1-mini")->required();
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--seed", seed, "Master seed");
  sweep->add_option("--duration", duration, "Scenario duration override (s)");
  sweep->add_option("--method", methods, "Methods (repeatable, default all)");
  sweep->add_option("--settings", settings, "Estimator settings JSON");
  sweep->add_option("--array", array, "Array geometry JSON");
  sweep->add_option("--workers", workers, "Worker threads (default NCMDOA_WORKERS or 1)");
  sweep->add_flag("--no-filtered", no_filtered, "Skip filtered WAV output");

  auto* run = app.add_subcommand("run", "Run a full pipeline from a run config");
  run->add_option("--config", config, "Run config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) {
      return report_status(ncmdoa_simulate(slurp(config).c_str(),
                                           array.empty() ? nullptr : array.c_str(),
                                           out.c_str()));
    }
    if (*estimate) {
      const std::string s = settings.empty() ? "" : slurp(settings);
      return report_status(ncmdoa_estimate_stage(scenario.c_str(), s.c_str()));
    }
    if (*beamform) {
      const std::string s = settings.empty() ? "" : slurp(settings);
      const std::string m = methods.empty() ? "all" : join(methods);
      return report_status(
          ncmdoa_beamform_stage(scenario.c_str(), m.c_str(), s.c_str(), no_filtered ? 0 : 1));
    }
    if (*report) {
      char* csv = nullptr;
      const ncmdoa_status s = ncmdoa_report(metrics.c_str(), group_by.c_str(), &csv);
      if (s != NCMDOA_OK) return report_status(s);
      if (out.empty()) {
        std::fputs(csv, stdout);
      } else {
        std::ofstream f(out, std::ios::binary);
        f << csv;
        if (!f) {
          ncmdoa_free(csv);
          std::cerr << "ncmdoa: cannot write " << out << "\n";
          return kExitStage;
        }
      }
      ncmdoa_free(csv);
      return kExitOk;
    }
    if (*sweep) {
      nlohmann::json cfg = {{"schema", 1},
                            {"preset", preset},
                            {"output", out},
                            {"master_seed", seed},
                            {"workers", workers},
                            {"write_filtered", !no_filtered}};
      if (duration > 0.0) cfg["duration_s"] = duration;
      if (!methods.empty() && !(methods.size() == 1 && methods[0] == "all")) {
        cfg["methods"] = methods;
      }
      if (!array.empty()) cfg["array"] = array;
      if (!settings.empty()) {
        try {
          cfg["estimator"] = nlohmann::json::parse(slurp(settings));
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError{settings + ": " + e.what()};
        }
      }
      return report_status(ncmdoa_run(cfg.dump().c_str(), nullptr));
    }
    if (*run) {
      const std::string text = slurp(config);
      const std::string base =
          std::filesystem::absolute(config).parent_path().string();
      return report_status(ncmdoa_run(text.c_str(), base.c_str()));
    }
  } catch (const ConfigError& e) {
    std::cerr << "ncmdoa: " << e.what << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
