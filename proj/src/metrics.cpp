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

#include "ncmdoa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "ncmdoa/error.hpp"

namespace ncmdoa {

namespace {

double ratio_db(double num, double den, bool& inf) {
  const double db = to_db(num / den);
  if (std::isinf(db) || std::isnan(db)) inf = true;
  return db;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Accepted spellings for each grouping column.
std::string canonical_parameter(const std::string& name) {
  static const std::map<std::string, std::string> alias = {
      {"t60", "t60_ms"},        {"t60_ms", "t60_ms"},
      {"dx", "dx_m"},           {"dx_m", "dx_m"},
      {"d_x", "dx_m"},          {"dp", "dp_m"},
      {"dp_m", "dp_m"},         {"d_p", "dp_m"},
      {"sir", "sir_db"},        {"sir_db", "sir_db"},
      {"scr", "scr_db"},        {"scr_db", "scr_db"},
      {"theta_b", "theta_b_deg"}, {"theta_b_deg", "theta_b_deg"},
      {"azimuth", "theta_b_deg"}};
  const auto it = alias.find(name);
  if (it == alias.end()) {
    fail(ErrorCode::kConfig,
         "unknown group-by parameter '" + name +
             "' (t60, dx, dp, sir, scr, theta_b)");
  }
  return it->second;
}

}  // namespace

double interior_variance(std::span<const double> x, std::size_t margin) {
  if (x.size() <= 2 * margin) return 0.0;
  const auto body = x.subspan(margin, x.size() - 2 * margin);
  double mean = 0.0;
  for (double v : body) mean += v;
  mean /= static_cast<double>(body.size());
  double acc = 0.0;
  for (double v : body) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(body.size());
}

double to_db(double ratio) {
  if (ratio == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(ratio)) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ratio);
}

double clip_db(double db) {
  if (std::isnan(db)) return db;
  return std::clamp(db, -kDbClip, kDbClip);
}

EnhancementReport enhancement_metrics(const MetricSignals& ref,
                                      const MetricSignals& filt,
                                      std::size_t margin) {
  const auto var = [&](const std::vector<double>& v) {
    return interior_variance(v, margin);
  };
  const double x1 = var(ref.desired), xf = var(filt.desired);
  const double e1 = var(ref.noise), ef = var(filt.noise);
  const double n1 = var(ref.interferer), nf = var(filt.interferer);
  const double p1 = var(ref.interferer_direct), pf = var(filt.interferer_direct);
  EnhancementReport r;
  const double inf = std::numeric_limits<double>::infinity();
  // Products are formed as ratios of ratios so that an exact zero
  // denominator surfaces as infinity rather than NaN.
  const double snr_f = ef > 0.0 ? xf / ef : inf;
  const double snr_1 = e1 > 0.0 ? x1 / e1 : inf;
  r.gsnr_db = ratio_db(snr_f, snr_1, r.infinite);
  const double sir_f = nf > 0.0 ? xf / nf : inf;
  const double sir_1 = n1 > 0.0 ? x1 / n1 : inf;
  r.gsir_db = ratio_db(sir_f, sir_1, r.infinite);
  r.isrf_db = ratio_db(p1, pf, r.infinite);
  r.dsrf_db = ratio_db(x1, xf, r.infinite);
  return r;
}

TheoreticalMetrics theoretical_metrics(const BinVectors& h,
                                       const SensorArray& array) {
  require(h.size() == array.bin_count(),
          "weights must cover every one-sided bin");
  double sg = 0.0, sw = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const Eigen::MatrixXd gamma = isotropic_coherence(
        array.positions(), array.bin_frequency(k), array.wave_speed());
    sg += h[k].dot(gamma.cast<Complex>() * h[k]).real();
    sw += h[k].squaredNorm();
  }
  const double kk = static_cast<double>(h.size());
  return {kk / sg, kk / sw};
}

double angular_error_deg(const Doa& estimate, const Doa& truth) {
  return rad2deg(std::acos(
      std::clamp(estimate.unit().dot(truth.unit()), -1.0, 1.0)));
}

double angular_error_deg(double estimate_azimuth, double true_azimuth) {
  return angular_error_deg(Doa{estimate_azimuth, 0.0}, Doa{true_azimuth, 0.0});
}

double quantile(std::vector<double> s, double p) {
  require(!s.empty(), "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, "quantile level must lie in [0, 1]");
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

BoxplotStats boxplot_stats(std::vector<double> s) {
  require(!s.empty(), "boxplot statistics of an empty sample");
  std::sort(s.begin(), s.end());
  return {quantile(s, 0.09), quantile(s, 0.25), quantile(s, 0.50),
          quantile(s, 0.75), quantile(s, 0.91)};
}

std::string boxplot_report(const std::string& csv, const std::string& group_by) {
  const std::string column = canonical_parameter(group_by);
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kConfig, "metrics CSV is empty");
  const auto header = split(line);
  const auto find = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      fail(ErrorCode::kConfig, "metrics CSV lacks column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t group_col = find(column);
  const std::size_t method_col = find("method");
  static const std::vector<std::string> metric_names = {
      "angular_error_deg", "gsnr_db", "gsir_db", "isrf_db",
      "dsrf_db",           "df_db",   "wng_db"};
  std::vector<std::size_t> metric_cols;
  for (const auto& m : metric_names) metric_cols.push_back(find(m));

  // (numeric value, label) keeps numeric ordering of the groups.
  using Key = std::tuple<double, std::string, std::string, std::size_t>;
  std::map<Key, std::vector<double>> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      fail(ErrorCode::kConfig, "malformed metrics CSV row: " + line);
    }
    const std::string& value = cells[group_col];
    const double numeric = std::strtod(value.c_str(), nullptr);
    for (std::size_t i = 0; i < metric_cols.size(); ++i) {
      const std::string& cell = cells[metric_cols[i]];
      if (cell.empty() || cell == "nan") continue;
      groups[Key{numeric, value, cells[method_col], i}].push_back(
          std::strtod(cell.c_str(), nullptr));
    }
  }
  std::string out = "parameter,value,method,metric,count,p9,p25,p50,p75,p91\n";
  char buf[256];
  for (const auto& [key, samples] : groups) {
    const BoxplotStats b = boxplot_stats(samples);
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  column.c_str(), std::get<1>(key).c_str(),
                  std::get<2>(key).c_str(),
                  metric_names[std::get<3>(key)].c_str(), samples.size(), b.p9,
                  b.p25, b.p50, b.p75, b.p91);
    out += buf;
  }
  return out;
}

}  // namespace ncmdoa
