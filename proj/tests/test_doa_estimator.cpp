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

#include <cmath>
#include <random>

#include "ncmdoa/doa_estimator.hpp"
#include "ncmdoa/error.hpp"
#include "support.hpp"

using namespace ncmdoa;

namespace {

double fd(DoaProblem& p, const VarianceVector& s, Doa d, bool elevation,
          double h = 1e-5) {
  Doa a = d, b = d;
  if (elevation) {
    a.elevation += h;
    b.elevation -= h;
  } else {
    a.azimuth += h;
    b.azimuth -= h;
  }
  return (broadband_cost(p, s, a) - broadband_cost(p, s, b)) / (2 * h);
}

SensorArray random_3d_array(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.04, 0.04);
  std::vector<Eigen::Vector3d> pos;
  for (int m = 0; m < 6; ++m) pos.emplace_back(u(rng), u(rng), u(rng));
  return SensorArray(pos, 0, 16000.0, 128);
}

}  // namespace

TEST_CASE("full gradient matches central differences on 3-D arrays") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> az(-kPi, kPi), el(-1.3, 1.3);
  for (int trial = 0; trial < 20; ++trial) {
    const SensorArray array = random_3d_array(rng);
    const Doa xd{az(rng), el(rng)}, xb{az(rng), el(rng)};
    auto truth = testing::random_variances(rng, array.bin_count());
    DoaProblem p(array,
                 testing::model_observation(array, xd, xb, truth, 1e-4), xd);
    const Doa at{xb.azimuth + 0.3, xb.elevation - 0.2};
    const auto sigma = testing::random_variances(rng, p.band_size());
    const DoaGradient g = doa_gradient(p, sigma, at, GradientForm::kFull);
    const double ft = fd(p, sigma, at, false), fp = fd(p, sigma, at, true);
    const double scale = std::hypot(ft, fp);
    CHECK(std::abs(g.azimuth - ft) <= 1e-4 * scale);
    CHECK(std::abs(g.elevation - fp) <= 1e-4 * scale);
  }
}

TEST_CASE("construct then recover on the 4x4 URA") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> az(deg2rad(20), deg2rad(160));
  std::uniform_real_distribution<double> off(deg2rad(10), deg2rad(15));
  const SensorArray array = testing::ura16();
  for (int trial = 0; trial < 5; ++trial) {
    const Doa xd{0.0, 0.0}, xb{az(rng), 0.0};
    auto truth = testing::random_variances(rng, array.bin_count());
    DoaProblem p(array,
                 testing::model_observation(array, xd, xb, truth, 1e-4), xd);
    DescentConfig cfg;
    cfg.initial = Doa{xb.azimuth + (rng() % 2 ? off(rng) : -off(rng)), 0.0};
    cfg.tol_grad = 1e-10;
    const JointEstimate est = joint_estimate(p, cfg);
    CHECK(std::abs(est.interferer.azimuth - xb.azimuth) < deg2rad(0.1));
    double worst = 0;
    for (std::size_t k = 1; k + 1 < array.bin_count(); ++k) {
      worst = std::max(worst, ((est.sigma[k] - truth[k]).cwiseAbs().array() /
                               truth[k].array())
                                  .maxCoeff());
    }
    CHECK(worst < 1e-6);
  }
}
