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

#ifndef NCMDOA_TESTS_SUPPORT_HPP_
#define NCMDOA_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/covariance.hpp"
#include "ncmdoa/types.hpp"

namespace ncmdoa::testing {

inline SensorArray ura16() {
  return SensorArray::uniform_rectangular(4, 4, 0.02, 16000.0, 128);
}

inline CMatrix random_hermitian_psd(std::mt19937_64& rng, Eigen::Index m,
                                    Eigen::Index rank) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix g(m, rank);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < rank; ++j) g(i, j) = Complex(n(rng), n(rng));
  }
  return g * g.adjoint() / static_cast<double>(rank);
}

// Exact model covariance for every bin of the array.
inline BinMatrices model_observation(const SensorArray& array, const Doa& xd,
                                     const Doa& xb,
                                     const VarianceVector& sigma,
                                     double epsilon) {
  BinMatrices out;
  for (std::size_t k = 0; k < array.bin_count(); ++k) {
    ComponentMatrices c{
        directional_pseudocov(steering_vector(array, xd, k)).matrix,
        directional_pseudocov(steering_vector(array, xb, k)).matrix,
        isotropic_pseudocov(array, k).matrix,
        white_pseudocov(array.size()).matrix};
    out.push_back(model_covariance(sigma[k], c, epsilon));
  }
  return out;
}

inline VarianceVector random_variances(std::mt19937_64& rng, std::size_t bins,
                                       double lo = 0.1, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  VarianceVector s(bins);
  for (auto& v : s) v = Variances(u(rng), u(rng), u(rng), u(rng));
  return s;
}

}  // namespace ncmdoa::testing

#endif  // NCMDOA_TESTS_SUPPORT_HPP_
