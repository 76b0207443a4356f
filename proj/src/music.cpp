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

#include "ncmdoa/music.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>

#include "ncmdoa/error.hpp"
#include "ncmdoa/io_util.hpp"

namespace ncmdoa {

std::vector<double> azimuth_grid(double step) {
  require(step > 0.0 && step <= kPi, "grid step must lie in (0, pi]");
  const auto n = static_cast<long>(std::llround(2.0 * kPi / step));
  require(std::abs(n * step - 2.0 * kPi) < 1e-9,
          "grid step must divide the full circle");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n));
  // Start one step above -pi so pi itself is the last point.
  for (long i = 1; i <= n; ++i) grid.push_back(-kPi + static_cast<double>(i) * step);
  grid.back() = kPi;
  return grid;
}

MusicSpectrum music_spectrum(const CMatrix& ry, const SensorArray& array,
                             std::size_t bin, const MusicConfig& cfg) {
  const auto m = static_cast<std::size_t>(ry.rows());
  require(m == array.size() && ry.cols() == ry.rows(),
          "covariance does not match the array");
  if (cfg.sources >= m) {
    fail(ErrorCode::kInvalidArgument,
         "source count " + std::to_string(cfg.sources) +
             " leaves no noise subspace for " + std::to_string(m) +
             " sensors");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (ry + ry.adjoint()));
  // Ascending eigenvalues: the first M - sources columns span the noise
  // subspace. Using the projector keeps the result independent of the
  // eigenvector phases.
  const auto noise = static_cast<Eigen::Index>(m - cfg.sources);
  const CMatrix en = es.eigenvectors().leftCols(noise);
  MusicSpectrum s;
  s.bin = bin;
  s.azimuths = azimuth_grid(cfg.grid_step);
  s.values.reserve(s.azimuths.size());
  for (double az : s.azimuths) {
    const CVector d = steering_vector(array, Doa{az, cfg.elevation}, bin);
    const double proj = (en.adjoint() * d).squaredNorm();
    s.values.push_back(1.0 / std::max(proj, 1e-300));
  }
  return s;
}

PeakSelection select_interferer(const MusicSpectrum& spectrum,
                                double desired_azimuth, double separation) {
  PeakSelection best;
  const auto& v = spectrum.values;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double prev = v[(i + n - 1) % n];
    const double next = v[(i + 1) % n];
    if (!(v[i] > prev && v[i] >= next)) continue;
    const double gap = std::abs(wrap_angle(spectrum.azimuths[i] - desired_azimuth));
    if (gap < separation - 1e-12) continue;
    if (!best.valid || v[i] > best.value) {
      best.valid = true;
      best.azimuth = spectrum.azimuths[i];
      best.value = v[i];
    }
  }
  return best;
}

BroadbandDoaEstimate phasor_average(const std::vector<double>& azimuths,
                                    const std::vector<double>* weights) {
  if (azimuths.empty()) {
    fail(ErrorCode::kNumeric, "phasor average needs at least one valid bin");
  }
  BroadbandDoaEstimate out;
  out.method = weights ? "wmsc" : "msc";
  out.per_bin = azimuths;
  if (weights) {
    require(weights->size() == azimuths.size(), "weight count mismatch");
    out.weights = *weights;
  } else {
    out.weights.assign(azimuths.size(), 1.0);
  }
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < azimuths.size(); ++i) {
    re += out.weights[i] * std::cos(azimuths[i]);
    im += out.weights[i] * std::sin(azimuths[i]);
  }
  out.azimuth = wrap_angle(std::atan2(im, re));
  return out;
}

MusicResult music_doa(const BinMatrices& ry, const SensorArray& array,
                      double desired_azimuth, const MusicConfig& cfg,
                      std::vector<std::size_t> bins) {
  require(ry.size() == array.bin_count(),
          "covariance bin count does not match the array");
  if (bins.empty()) {
    for (std::size_t k = 0; k < array.bin_count(); ++k) {
      if (array.bin_frequency(k) >= cfg.min_frequency) bins.push_back(k);
    }
  }
  MusicResult r;
  std::vector<double> az, w;
  for (std::size_t k : bins) {
    require(k < ry.size(), "MUSIC bin out of range");
    if (array.bin_frequency(k) < cfg.min_frequency) continue;
    MusicSpectrum s = music_spectrum(ry[k], array, k, cfg);
    const PeakSelection p = select_interferer(s, desired_azimuth, cfg.separation);
    if (p.valid) {
      az.push_back(p.azimuth);
      w.push_back(p.value);
    }
    r.spectra.push_back(std::move(s));
    r.peaks.push_back(p);
  }
  r.msc = phasor_average(az);
  r.wmsc = phasor_average(az, &w);
  return r;
}

void export_spectra_csv(const std::filesystem::path& path,
                        const std::vector<MusicSpectrum>& spectra) {
  std::string out = "bin,azimuth_deg,value\n";
  char line[96];
  for (const auto& s : spectra) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%.1f,%.9e\n", s.bin,
                    rad2deg(s.azimuths[i]), s.values[i]);
      out += line;
    }
  }
  write_text_atomic(path, out);
}

}  // namespace ncmdoa
