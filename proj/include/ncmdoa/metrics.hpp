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

#ifndef NCMDOA_METRICS_HPP_
#define NCMDOA_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/types.hpp"

namespace ncmdoa {

inline constexpr double kDbClip = 120.0;

// Single-channel time signals: either the reference-sensor view of each
// component or the same component after filtering.
struct MetricSignals {
  // Desired direct path only.
  std::vector<double> desired;
  // Interferer direct path.
  std::vector<double> interferer_direct;
  // Interferer including its reverberant share.
  std::vector<double> interferer;
  // Everything except the desired direct path.
  std::vector<double> noise;
};

struct EnhancementReport {
  double gsnr_db = 0.0;
  double gsir_db = 0.0;
  double isrf_db = 0.0;
  double dsrf_db = 0.0;
  double df_db = 0.0;
  double wng_db = 0.0;
  // Set when a ratio had a zero-variance denominator and is +-inf.
  bool infinite = false;
};

// Variance of samples [margin, size - margin).
double interior_variance(std::span<const double> x, std::size_t margin);

// 10 log10(ratio); zero and infinite ratios map to -inf / +inf.
double to_db(double ratio);
// Clips +-inf to +-kDbClip for export.
double clip_db(double db);

EnhancementReport enhancement_metrics(const MetricSignals& reference,
                                      const MetricSignals& filtered,
                                      std::size_t margin);

struct TheoreticalMetrics {
  double df = 0.0;
  double wng = 0.0;
};

// DF = K / sum_k h^H Gamma h, WNG = K / sum_k h^H h over all K bins.
TheoreticalMetrics theoretical_metrics(const BinVectors& h,
                                       const SensorArray& array);

// Degrees in [0, 180].
double angular_error_deg(const Doa& estimate, const Doa& truth);
double angular_error_deg(double estimate_azimuth, double true_azimuth);

struct BoxplotStats {
  double p9 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p91 = 0.0;
};

// Linear interpolation between order statistics (type 7).
double quantile(std::vector<double> samples, double p);
BoxplotStats boxplot_stats(std::vector<double> samples);

// Parses a metrics CSV and returns one boxplot row per (value, method,
// metric) for the given parameter column.
std::string boxplot_report(const std::string& metrics_csv,
                           const std::string& group_by);

}  // namespace ncmdoa

#endif  // NCMDOA_METRICS_HPP_
