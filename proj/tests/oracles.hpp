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

#ifndef NCMDOA_TESTS_ORACLES_HPP_
#define NCMDOA_TESTS_ORACLES_HPP_

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/variance_solver.hpp"
#include "support.hpp"

namespace ncmdoa::testing {

struct OracleSolution {
  Eigen::Vector4d sigma = Eigen::Vector4d::Zero();
  double cost = 0.0;
  // Bit z set where sigma_z is held at zero.
  unsigned zeros = 0xF;
};

// Brute-force minimum of 0.5 s^T A s - q^T s over s >= 0: every support
// set is solved on its principal submatrix and the cheapest feasible
// stationary point wins. The empty support (s = 0) is always feasible.
inline OracleSolution exhaustive_nonnegative(const Eigen::Matrix4d& a,
                                             const Eigen::Vector4d& q) {
  OracleSolution best;
  for (unsigned support = 1; support < 16; ++support) {
    std::vector<int> idx;
    for (int z = 0; z < 4; ++z) {
      if ((support >> z) & 1u) idx.push_back(z);
    }
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(n, n);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rhs[i] = q[idx[i]];
      for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = a(idx[i], idx[j]);
    }
    const Eigen::VectorXd x = sub.completeOrthogonalDecomposition().solve(rhs);
    const double tol = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
    if ((x.array() < -tol).any()) continue;
    Eigen::Vector4d s = Eigen::Vector4d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) s[idx[i]] = std::max(x[i], 0.0);
    const double cost = 0.5 * s.dot(a * s) - q.dot(s);
    if (cost < best.cost) {
      best.cost = cost;
      best.sigma = s;
      best.zeros = 0xF & ~support;
    }
  }
  return best;
}

// Random strictly convex system whose unconstrained minimiser has mixed
// signs.
inline NormalSystem random_gram_system(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix4d g;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) g(i, j) = n(rng);
  }
  NormalSystem sys;
  sys.a = g.transpose() * g + 1e-3 * Eigen::Matrix4d::Identity();
  Eigen::Vector4d target;
  for (int i = 0; i < 4; ++i) target[i] = n(rng);
  sys.q = sys.a * target;
  return sys;
}

// System built from the array's own components and a random observed
// covariance, as the estimator sees it.
inline NormalSystem random_model_system(std::mt19937_64& rng,
                                        const SensorArray& array) {
  std::uniform_real_distribution<double> az(-kPi, kPi);
  std::uniform_int_distribution<std::size_t> bin(8, array.bin_count() - 2);
  std::uniform_int_distribution<int> rank(1, 6);
  const std::size_t k = bin(rng);
  const Doa xd{az(rng), 0.0}, xb{az(rng), 0.0};
  const ComponentMatrices c{
      directional_pseudocov(steering_vector(array, xd, k)).matrix,
      directional_pseudocov(steering_vector(array, xb, k)).matrix,
      isotropic_pseudocov(array, k).matrix,
      white_pseudocov(array.size()).matrix};
  const auto m = static_cast<Eigen::Index>(array.size());
  const CMatrix ry = random_hermitian_psd(rng, m, rank(rng));
  return build_system(c, ry);
}

}  // namespace ncmdoa::testing

#endif  // NCMDOA_TESTS_ORACLES_HPP_
