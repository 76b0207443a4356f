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


#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/error.hpp"
#include "ncmdoa/music.hpp"
#include "support.hpp"

using namespace ncmdoa;
namespace fs = std::filesystem;

namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Spectrum on the default grid with Gaussian bumps of the given heights.
MusicSpectrum bumps(const std::vector<std::pair<double, double>>& peaks) {
  MusicSpectrum s;
  s.azimuths = azimuth_grid(deg2rad(1.0));
  for (double az : s.azimuths) {
    double v = 1e-3;
    for (const auto& [at, height] : peaks) {
      const double gap = wrap_angle(az - deg2rad(at));
      v += height * std::exp(-gap * gap / (2.0 * deg2rad(3.0) * deg2rad(3.0)));
    }
    s.values.push_back(v);
  }
  return s;
}

double deg_gap(double a, double b_deg) {
  return std::abs(rad2deg(wrap_angle(a - deg2rad(b_deg))));
}

}  // namespace

TEST_CASE("grid covers the half-open circle") {
  const auto g = azimuth_grid(deg2rad(1.0));
  CHECK(g.size() == 360);
  CHECK(g.front() == doctest::Approx(deg2rad(-179.0)));
  CHECK(g.back() == kPi);
  CHECK_THROWS_AS(azimuth_grid(deg2rad(7.0)), Error);
}

TEST_CASE("single plane wave peaks at its direction") {
  const SensorArray array = testing::ura16();
  for (const std::size_t k : {20u, 40u, 60u}) {
    const CVector b = steering_vector(array, {deg2rad(40.0), 0.0}, k);
    const CMatrix ry = b * b.adjoint() + 0.01 * CMatrix::Identity(16, 16);
    const MusicSpectrum s = music_spectrum(ry, array, k);
    CHECK(deg_gap(s.azimuths[argmax(s.values)], 40.0) <= 1.0);
    for (double v : s.values) CHECK(v > 0.0);
  }
}

TEST_CASE("structureless covariance gives a flat spectrum") {
  const SensorArray array = testing::ura16();
  const MusicSpectrum s = music_spectrum(CMatrix::Identity(16, 16), array, 30);
  const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
  CHECK(*hi / *lo < 1.0 + 1e-6);
}

TEST_CASE("source count must leave a noise subspace") {
  const SensorArray array = testing::ura16();
  MusicConfig cfg;
  cfg.sources = 16;
  CHECK_THROWS_AS(music_spectrum(CMatrix::Identity(16, 16), array, 30, cfg), Error);
}

TEST_CASE("interferer peak selection") {
  PeakSelection p = select_interferer(bumps({{0, 5}, {60, 1}}), 0.0, deg2rad(5.0));
  REQUIRE(p.valid);
  CHECK(deg_gap(p.azimuth, 60.0) < 1e-9);

  p = select_interferer(bumps({{2, 5}}), 0.0, deg2rad(5.0));
  CHECK_FALSE(p.valid);

  p = select_interferer(bumps({{30, 4}, {80, 2}}), 0.0, deg2rad(5.0));
  REQUIRE(p.valid);
  CHECK(deg_gap(p.azimuth, 30.0) < 1e-9);
}

TEST_CASE("unequal two-source covariance favours the stronger source") {
  const SensorArray array = testing::ura16();
  const std::size_t k = 40;
  const CVector b1 = steering_vector(array, {deg2rad(30.0), 0.0}, k);
  const CVector b2 = steering_vector(array, {deg2rad(80.0), 0.0}, k);
  const CMatrix ry = 2.0 * b1 * b1.adjoint() + 0.5 * b2 * b2.adjoint() +
                     0.05 * CMatrix::Identity(16, 16);
  // Both exact directions are nulls of the two-source noise subspace, so
  // the heights there carry no power information. A one-source subspace
  // keeps only the stronger one.
  MusicConfig cfg;
  cfg.sources = 1;
  const MusicSpectrum s = music_spectrum(ry, array, k, cfg);
  const PeakSelection p = select_interferer(s, deg2rad(-90.0),
                                            deg2rad(5.0));
  REQUIRE(p.valid);
  CHECK(deg_gap(p.azimuth, 30.0) <= 1.0);
}

TEST_CASE("phasor averages") {
  CHECK(rad2deg(phasor_average(std::vector<double>(7, deg2rad(25.0))).azimuth) ==
        doctest::Approx(25.0));
  CHECK(phasor_average({deg2rad(40.0), deg2rad(-40.0)}).azimuth ==
        doctest::Approx(0.0));
  const std::vector<double> w = {1.0, 1.0, 0.0};
  CHECK(rad2deg(phasor_average({deg2rad(10.0), deg2rad(10.0), deg2rad(170.0)}, &w)
                    .azimuth) == doctest::Approx(10.0));
  const double wrap = phasor_average({deg2rad(179.0), deg2rad(-179.0)}).azimuth;
  CHECK(std::abs(wrap_angle(wrap - kPi)) < 1e-12);
  const std::vector<double> az = {0.1, 0.5, -2.0, 3.0};
  const std::vector<double> equal(4, 3.7);
  CHECK(phasor_average(az, &equal).azimuth ==
        doctest::Approx(phasor_average(az).azimuth).epsilon(1e-14));
  CHECK_THROWS_AS(phasor_average({}), Error);
}

TEST_CASE("per-bin estimates track two separated plane waves") {
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(12);
  const std::size_t l = 4000;
  const double theta_d = 0.0, theta_b = deg2rad(75.0);
  BinMatrices ry;
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  for (std::size_t k = 0; k < array.bin_count(); ++k) {
    const CVector d = steering_vector(array, {theta_d, 0.0}, k);
    const CVector b = steering_vector(array, {theta_b, 0.0}, k);
    CMatrix r = CMatrix::Zero(16, 16);
    for (std::size_t j = 0; j < l; ++j) {
      CVector y = d * Complex(n(rng), n(rng)) + b * Complex(n(rng), n(rng));
      for (Eigen::Index m = 0; m < 16; ++m) y[m] += 0.03 * Complex(n(rng), n(rng));
      r += y * y.adjoint();
    }
    ry.push_back(r / static_cast<double>(l));
  }
  const MusicResult res = music_doa(ry, array, theta_d);
  std::size_t counted = 0, good = 0;
  for (std::size_t i = 0; i < res.spectra.size(); ++i) {
    if (array.bin_frequency(res.spectra[i].bin) <= 500.0) continue;
    ++counted;
    if (res.peaks[i].valid && deg_gap(res.peaks[i].azimuth, 75.0) <= 1.0 + 1e-9) ++good;
  }
  REQUIRE(counted > 50);
  CHECK(static_cast<double>(good) >= 0.9 * static_cast<double>(counted));
  CHECK(deg_gap(res.msc.azimuth, 75.0) < 1.0);
  CHECK(deg_gap(res.wmsc.azimuth, 75.0) < 1.0);
}

TEST_CASE("spectra export as csv") {
  const SensorArray array = testing::ura16();
  const MusicSpectrum s = music_spectrum(CMatrix::Identity(16, 16), array, 5);
  const fs::path p = fs::temp_directory_path() /
                     ("ncmdoa-music-" + std::to_string(::getpid()) + ".csv");
  export_spectra_csv(p, {s});
  std::ifstream in(p);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "bin,azimuth_deg,value");
  while (std::getline(in, line)) {
    CHECK(line.rfind("5,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 360);
  fs::remove(p);
}
