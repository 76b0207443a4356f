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

#ifndef NCMDOA_MUSIC_HPP_
#define NCMDOA_MUSIC_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/types.hpp"

namespace ncmdoa {

struct MusicConfig {
  double grid_step = deg2rad(1.0);
  // Signal subspace dimension: desired source plus one interferer.
  std::size_t sources = 2;
  double separation = deg2rad(5.0);
  // Bins below this frequency are left out of the broadband averages.
  double min_frequency = 100.0;
  // Elevation of the scanned directions.
  double elevation = 0.0;
};

struct MusicSpectrum {
  std::size_t bin = 0;
  std::vector<double> azimuths;
  // 1 / ||E_n^H d(theta)||^2.
  std::vector<double> values;
};

// Azimuth grid over (-pi, pi], ascending.
std::vector<double> azimuth_grid(double step);

MusicSpectrum music_spectrum(const CMatrix& ry, const SensorArray& array,
                             std::size_t bin, const MusicConfig& cfg = {});

struct PeakSelection {
  bool valid = false;
  double azimuth = 0.0;
  double value = 0.0;
};

// Highest circular local maximum at least `separation` away from the
// desired azimuth.
PeakSelection select_interferer(const MusicSpectrum& spectrum,
                                double desired_azimuth, double separation);

struct BroadbandDoaEstimate {
  std::string method;
  double azimuth = 0.0;
  std::vector<double> per_bin;
  std::vector<double> weights;
};

// Angle of sum_k w_k exp(i theta_k); unit weights when none are given.
BroadbandDoaEstimate phasor_average(const std::vector<double>& azimuths,
                                    const std::vector<double>* weights = nullptr);

struct MusicResult {
  BroadbandDoaEstimate msc;
  BroadbandDoaEstimate wmsc;
  std::vector<MusicSpectrum> spectra;
  std::vector<PeakSelection> peaks;
};

// Per-bin MUSIC over `bins` (all bins at or above min_frequency when
// empty). Raises kNumeric when no bin yields an admissible peak.
MusicResult music_doa(const BinMatrices& ry, const SensorArray& array,
                      double desired_azimuth, const MusicConfig& cfg = {},
                      std::vector<std::size_t> bins = {});

// CSV rows: bin,azimuth_deg,value.
void export_spectra_csv(const std::filesystem::path& path,
                        const std::vector<MusicSpectrum>& spectra);

}  // namespace ncmdoa

#endif  // NCMDOA_MUSIC_HPP_
