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


// Exercises the shared library through its C interface only.

#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ncmdoa/ncmdoa.h"

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("ncmdoa-capi-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

// Four sensors on x spaced one sample of travel apart: an endfire plane
// wave is an integer delay per sensor and a broadside one is none.
struct LineScene {
  ncmdoa_array* array = nullptr;
  std::vector<std::vector<double>> channels;
  std::vector<const double*> pointers;

  LineScene() {
    const double c = 343.0, fs_hz = 16000.0, dx = c / fs_hz;
    const double pos[12] = {0, 0, 0, dx, 0, 0, 2 * dx, 0, 0, 3 * dx, 0, 0};
    REQUIRE(ncmdoa_array_create(pos, 4, 0, fs_hz, 128, c, &array) == NCMDOA_OK);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 16000;
    std::vector<double> x(n + 8), p(n + 8);
    for (auto& v : x) v = g(rng);
    for (auto& v : p) v = g(rng);
    channels.assign(4, std::vector<double>(n));
    for (std::size_t m = 0; m < 4; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        channels[m][i] = x[i + 4] + p[i + 4 - m] + 0.01 * g(rng);
      }
    }
    for (auto& ch : channels) pointers.push_back(ch.data());
  }
  ~LineScene() { ncmdoa_array_destroy(array); }
};

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(ncmdoa_version()).size() > 0);
  CHECK(std::string(ncmdoa_status_name(NCMDOA_OK)) == "ok");
  CHECK(std::string(ncmdoa_status_name(NCMDOA_E_CONSTRAINT_COLLISION)).size() > 0);
  CHECK(ncmdoa_status_name(static_cast<ncmdoa_status>(99)) != nullptr);
}

TEST_CASE("null arguments and bad geometry report errors") {
  CHECK(ncmdoa_array_default(nullptr) == NCMDOA_E_INVALID_ARGUMENT);
  CHECK(std::string(ncmdoa_last_error()).find("NULL") != std::string::npos);

  ncmdoa_array* a = nullptr;
  const double same[6] = {0, 0, 0, 0, 0, 0};
  CHECK(ncmdoa_array_create(same, 2, 0, 16000.0, 128, 343.0, &a) ==
        NCMDOA_E_DEGENERATE_GEOMETRY);
  CHECK(a == nullptr);
  CHECK(ncmdoa_array_load("/nonexistent/array.json", &a) == NCMDOA_E_IO);

  REQUIRE(ncmdoa_array_default(&a) == NCMDOA_OK);
  CHECK(std::string(ncmdoa_last_error()).empty());
  CHECK(ncmdoa_array_sensors(a) == 16);
  CHECK(ncmdoa_array_bins(a) == 65);
  double sv[32];
  CHECK(ncmdoa_steering_vector(a, 0.3, 0.0, 65, sv) == NCMDOA_E_INVALID_ARGUMENT);
  REQUIRE(ncmdoa_steering_vector(a, 0.3, 0.0, 10, sv) == NCMDOA_OK);
  for (int m = 0; m < 16; ++m) {
    CHECK(std::hypot(sv[2 * m], sv[2 * m + 1]) == doctest::Approx(1.0));
  }
  ncmdoa_array_destroy(a);
  ncmdoa_array_destroy(nullptr);
}

TEST_CASE("nonnegative solve through the C interface") {
  const double a[16] = {1, 0.9, 0, 0, 0.9, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  // q = A (-1, 0.1, 1, 1).
  const double q[4] = {-0.91, -0.8, 1.0, 1.0};
  double sigma[4];
  unsigned mask = 0;
  REQUIRE(ncmdoa_solve_nonnegative(a, q, sigma, &mask) == NCMDOA_OK);
  CHECK(mask == 3u);
  CHECK(sigma[0] == 0.0);
  CHECK(sigma[1] == 0.0);
  CHECK(sigma[2] == doctest::Approx(1.0));
  CHECK(sigma[3] == doctest::Approx(1.0));
  const double singular[16] = {1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  CHECK(ncmdoa_solve_nonnegative(singular, q, sigma, &mask) ==
        NCMDOA_E_DEGENERATE_SYSTEM);
}

TEST_CASE("estimate, design and apply on an endfire interferer") {
  LineScene s;
  ncmdoa_estimate* est = nullptr;
  CHECK(ncmdoa_estimate_create(s.array, s.pointers.data(), 16000, kPi / 2, 0.0,
                               "{\"bogus\": 1}", &est) == NCMDOA_E_CONFIG);
  REQUIRE(ncmdoa_estimate_create(s.array, s.pointers.data(), 16000, kPi / 2,
                                 0.0, nullptr, &est) == NCMDOA_OK);
  double az = 0.0, el = 0.0;
  REQUIRE(ncmdoa_estimate_interferer(est, &az, &el) == NCMDOA_OK);
  // A line array only sees the cone angle; endfire is unambiguous.
  CHECK(std::abs(std::sin(az)) < std::sin(5.0 * kPi / 180.0));

  std::vector<double> var(65 * 4);
  REQUIRE(ncmdoa_estimate_variances(est, var.data()) == NCMDOA_OK);
  for (double v : var) CHECK(v >= 0.0);

  char* info = nullptr;
  REQUIRE(ncmdoa_estimate_info(est, &info) == NCMDOA_OK);
  CHECK(std::string(info).find('{') == 0);
  ncmdoa_free(info);

  ncmdoa_weights* w = nullptr;
  CHECK(ncmdoa_beamformer_design(est, "wiener", &w) != NCMDOA_OK);
  REQUIRE(ncmdoa_beamformer_design(est, "ncm-lcmv", &w) == NCMDOA_OK);
  double h[8], d[8];
  REQUIRE(ncmdoa_weights_get(w, 20, h) == NCMDOA_OK);
  REQUIRE(ncmdoa_steering_vector(s.array, kPi / 2, 0.0, 20, d) == NCMDOA_OK);
  std::complex<double> resp = 0.0;
  for (int m = 0; m < 4; ++m) {
    resp += std::conj(std::complex<double>(h[2 * m], h[2 * m + 1])) *
            std::complex<double>(d[2 * m], d[2 * m + 1]);
  }
  CHECK(std::abs(resp - 1.0) < 1e-9);
  CHECK(ncmdoa_weights_get(w, 65, h) == NCMDOA_E_INVALID_ARGUMENT);

  std::vector<double> out(16000);
  std::size_t got = 0;
  REQUIRE(ncmdoa_weights_apply(w, s.pointers.data(), 16000, out.data(), &got) ==
          NCMDOA_OK);
  CHECK(got > 15000);
  CHECK(got <= 16000);
  ncmdoa_weights_destroy(w);
  ncmdoa_estimate_destroy(est);
}

TEST_CASE("stage functions write a scenario tree") {
  const fs::path dir = scratch("stages");
  const std::string cfg = R"({"id": "capi", "t60_ms": 0, "dx_m": 1.5,
      "dp_m": 1.5, "theta_b_deg": 70, "sir_db": 0, "scr_db": 5,
      "duration_s": 1.0, "seed": 3})";
  REQUIRE(ncmdoa_simulate(cfg.c_str(), nullptr, dir.c_str()) == NCMDOA_OK);
  CHECK(fs::exists(dir / "manifest.json"));
  REQUIRE(ncmdoa_estimate_stage(dir.c_str(), nullptr) == NCMDOA_OK);
  CHECK(fs::exists(dir / "estimates.json"));
  REQUIRE(ncmdoa_beamform_stage(dir.c_str(), "ncm-lcmv,msc", nullptr, 0) ==
          NCMDOA_OK);
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(ncmdoa_beamform_stage(dir.c_str(), "nope", nullptr, 0) == NCMDOA_E_CONFIG);

  char* csv = nullptr;
  REQUIRE(ncmdoa_report((dir / "metrics.csv").c_str(), "t60", &csv) == NCMDOA_OK);
  CHECK(std::string(csv).rfind("parameter,value,method", 0) == 0);
  ncmdoa_free(csv);
  CHECK(ncmdoa_report((dir / "metrics.csv").c_str(), "colour", &csv) ==
        NCMDOA_E_CONFIG);
  CHECK(ncmdoa_report("/nonexistent.csv", "t60", &csv) == NCMDOA_E_IO);
  CHECK(ncmdoa_simulate("{not json", nullptr, dir.c_str()) == NCMDOA_E_CONFIG);
  CHECK(ncmdoa_run("{\"schema\": 1}", nullptr) == NCMDOA_E_CONFIG);
  fs::remove_all(dir);
}
