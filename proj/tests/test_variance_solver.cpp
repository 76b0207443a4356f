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
#include <string>

#include "ncmdoa/error.hpp"
#include "ncmdoa/variance_solver.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ncmdoa;

namespace {

ComponentMatrices components_at(const SensorArray& array, const Doa& xd,
                                const Doa& xb, std::size_t k) {
  return {directional_pseudocov(steering_vector(array, xd, k)).matrix,
          directional_pseudocov(steering_vector(array, xb, k)).matrix,
          isotropic_pseudocov(array, k).matrix,
          white_pseudocov(array.size()).matrix};
}

NormalSystem from_target(const Eigen::Matrix4d& a, const Eigen::Vector4d& s) {
  NormalSystem sys;
  sys.a = a;
  sys.q = a * s;
  return sys;
}

bool has_negative(const Variances& s) { return (s.array() < 0.0).any(); }

}  // namespace

TEST_CASE("normal system entries for unit-modulus components") {
  const SensorArray array = testing::ura16();
  const double m = 16.0;
  for (const std::size_t k : {1u, 17u, 40u, 63u}) {
    const ComponentMatrices c =
        components_at(array, {0.3, 0.0}, {2.0, 0.0}, k);
    const NormalSystem sys = build_system(c, c.white);
    CHECK(sys.a(kV, kV) == doctest::Approx(2.0 * m).epsilon(1e-14));
    CHECK(sys.a(kX, kX) == doctest::Approx(2.0 * m * m).epsilon(1e-14));
    CHECK(sys.a(kP, kP) == doctest::Approx(2.0 * m * m).epsilon(1e-14));
    CHECK(sys.a(kX, kV) == doctest::Approx(2.0 * m).epsilon(1e-14));
    CHECK(sys.a(kV, kX) == sys.a(kX, kV));
    CHECK((sys.a - sys.a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(sys.a);
    CHECK(es.eigenvalues()[0] >= -1e-10 * sys.a.trace());
  }
}

TEST_CASE("exact model covariance is recovered") {
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 2.0), az(-kPi, kPi);
  const double eps = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng() % 60;
    const Doa xd{az(rng), 0.0};
    const Doa xb{xd.azimuth + deg2rad(20.0) + u(rng), 0.0};
    const ComponentMatrices c = components_at(array, xd, xb, k);
    const Variances truth(u(rng), u(rng), u(rng), u(rng));
    const CMatrix ry = model_covariance(truth, c, eps);
    const NormalSystem sys =
        build_system(c, ry - eps * CMatrix::Identity(16, 16));
    const Variances s = solve_unconstrained(sys);
    CHECK((s - truth).cwiseAbs().maxCoeff() < 1e-8);
    const ActiveSetState st = solve_nonnegative(sys);
    CHECK(st.active == 0);
    CHECK(st.sigma == s);
  }
}

TEST_CASE("diagonal system returns the target") {
  const Eigen::Vector4d diag(0.5, 3.0, 7.0, 1.25);
  const Eigen::Vector4d s(0.2, -1.0, 4.0, 9.0);
  NormalSystem sys;
  sys.a = (2.0 * diag).asDiagonal();
  sys.q = 2.0 * diag.cwiseProduct(s);
  CHECK((solve_unconstrained(sys) - s).cwiseAbs().maxCoeff() < 1e-15);
  const ActiveSetState st = solve_nonnegative(sys);
  CHECK(st.active == (1u << kP));
  CHECK(st.sigma == Variances(0.2, 0.0, 4.0, 9.0));
}

TEST_CASE("interferer at the desired direction is a degenerate system") {
  const SensorArray array = testing::ura16();
  const ComponentMatrices c =
      components_at(array, {0.7, 0.0}, {0.7, 0.0}, 20);
  const NormalSystem sys = build_system(c, c.white);
  try {
    solve_unconstrained(sys);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSystem);
    const std::string what = e.what();
    CHECK(what.find('x') != std::string::npos);
    CHECK(what.find('p') != std::string::npos);
  }
  CHECK_THROWS_AS(solve_nonnegative(sys), Error);
}

TEST_CASE("near-collinear system is loaded once") {
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
  a(0, 1) = a(1, 0) = 1.0 - 1.5e-12;
  const Conditioned c = condition_system(from_target(a, Variances::Ones()));
  CHECK(c.loaded);
  CHECK(c.a(0, 0) == doctest::Approx(1.0 + 1e-10).epsilon(1e-15));
  CHECK(c.a(0, 1) == a(0, 1));
  CHECK(solve_nonnegative(from_target(a, Variances::Ones())).loaded);
  CHECK_FALSE(condition_system(from_target(Eigen::Matrix4d::Identity(),
                                           Variances::Ones()))
                  .loaded);
}

TEST_CASE("crafted mixed-sign instance matches the exhaustive oracle") {
  std::mt19937_64 rng(1);
  const Variances target(1.0, -0.5, 2.0, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    NormalSystem sys = testing::random_gram_system(rng);
    sys.q = sys.a * target;
    const ActiveSetState st = solve_nonnegative(sys);
    CHECK((st.unconstrained - target).cwiseAbs().maxCoeff() < 1e-6);
    const auto oracle = testing::exhaustive_nonnegative(sys.a, sys.q);
    CHECK(st.active == oracle.zeros);
    CHECK((st.sigma - oracle.sigma).cwiseAbs().maxCoeff() <
          1e-9 * std::max(1.0, oracle.sigma.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("all-negative pull clamps every entry") {
  // Component Gram matrices have nonnegative entries, so A*1 > 0 and the
  // origin satisfies the optimality conditions.
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    NormalSystem sys = testing::random_model_system(rng, array);
    REQUIRE((sys.a.array() >= 0.0).all());
    sys.q = -sys.a * Variances::Ones();
    const ActiveSetState st = solve_nonnegative(sys);
    CHECK(st.active == 0xF);
    CHECK(st.sigma == Variances::Zero());
    CHECK(st.cost == doctest::Approx(sys.offset));
  }
}

TEST_CASE("feasible solution is returned unchanged") {
  std::mt19937_64 rng(3);
  NormalSystem sys = testing::random_gram_system(rng);
  sys.q = sys.a * Variances(0.1, 0.2, 0.3, 0.4);
  const ActiveSetState st = solve_nonnegative(sys);
  CHECK(st.active == 0);
  CHECK(st.sigma == st.unconstrained);
  CHECK(st.solves == 1);
  CHECK(st.zeta == Variances::Zero());
}

TEST_CASE("clamped entries need not be negative in the unconstrained solve") {
  // A positive coupling between x and p drags p below zero once x is
  // clamped, although the unconstrained p is positive.
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
  a(0, 1) = a(1, 0) = 0.9;
  const NormalSystem sys = from_target(a, Variances(-1.0, 0.1, 1.0, 1.0));
  const ActiveSetState st = solve_nonnegative(sys);
  const auto oracle = testing::exhaustive_nonnegative(sys.a, sys.q);
  CHECK(st.unconstrained[kP] > 0.0);
  CHECK(st.active == ((1u << kX) | (1u << kP)));
  CHECK(st.active == oracle.zeros);
  CHECK((st.sigma - Variances(0.0, 0.0, 1.0, 1.0)).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("random systems agree with the exhaustive oracle") {
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(20261014);
  int boundary_failures = 0, kkt_failures = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const NormalSystem sys = trial % 2 ? testing::random_model_system(rng, array)
                                       : testing::random_gram_system(rng);
    const ActiveSetState st = solve_nonnegative(sys);
    const auto oracle = testing::exhaustive_nonnegative(sys.a, sys.q);
    const double c_oracle = sys.cost(oracle.sigma);
    const double c_got = sys.cost(st.sigma);
    const double scale = std::max({1.0, std::abs(c_oracle), sys.offset});
    if (std::abs(c_got - c_oracle) > 1e-10 * scale) ++mismatches;

    CHECK(st.solves <= 16);
    CHECK((st.sigma.array() >= 0.0).all());
    CHECK(c_got >= sys.cost(st.unconstrained) - 1e-12 * scale);
    if (has_negative(st.unconstrained)) {
      if (st.active == 0) ++boundary_failures;
      CHECK(c_got > sys.cost(st.unconstrained));
    } else {
      CHECK(st.sigma == st.unconstrained);
    }
    const Eigen::Vector4d grad = sys.a * st.sigma - sys.q;
    const double gtol = 1e-9 * (sys.q.cwiseAbs().maxCoeff() + 1e-300);
    for (std::size_t z = 0; z < 4; ++z) {
      if (st.is_active(z)) {
        CHECK(st.sigma[z] == 0.0);
        if (st.zeta[z] < -gtol) ++kkt_failures;
      } else {
        CHECK(st.zeta[z] == 0.0);
        if (std::abs(grad[z]) > gtol) ++kkt_failures;
      }
    }
  }
  CHECK(mismatches == 0);
  CHECK(boundary_failures == 0);
  CHECK(kkt_failures == 0);
}

TEST_CASE("scaling the observation scales the variances") {
  const SensorArray array = testing::ura16();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> az(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 4 + rng() % 58;
    const ComponentMatrices c =
        components_at(array, {az(rng), 0.0}, {az(rng), 0.0}, k);
    const CMatrix ry = testing::random_hermitian_psd(rng, 16, 1 + rng() % 4);
    const double alpha = std::exp(az(rng));
    const ActiveSetState s1 = solve_nonnegative(build_system(c, ry));
    const ActiveSetState s2 = solve_nonnegative(build_system(c, alpha * ry));
    CHECK(s1.active == s2.active);
    CHECK((alpha * s1.sigma - s2.sigma).cwiseAbs().maxCoeff() <
          1e-9 * alpha * std::max(1.0, s1.sigma.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("debug dump carries the per-bin solve") {
  std::mt19937_64 rng(5);
  NormalSystem sys = testing::random_gram_system(rng);
  sys.q = sys.a * Variances(1.0, -0.5, 2.0, 0.3);
  const ActiveSetState st = solve_nonnegative(sys);
  const nlohmann::json j = debug_json(7, sys, st);
  CHECK(j.at("bin") == 7);
  CHECK(j.at("A").size() == 4);
  CHECK(j.at("q").size() == 4);
  CHECK(j.at("sigma").size() == 4);
  CHECK(j.at("sigma_unconstrained")[1].get<double>() < 0.0);
  CHECK(j.at("solves") == st.solves);
}
