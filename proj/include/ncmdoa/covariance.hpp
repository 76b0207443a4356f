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

#ifndef NCMDOA_COVARIANCE_HPP_
#define NCMDOA_COVARIANCE_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/stft.hpp"
#include "ncmdoa/types.hpp"

namespace ncmdoa {

inline constexpr double kDefaultEpsilon = 1e-4;

// Model component order used by every 4-vector in the library.
enum Component : std::size_t { kX = 0, kP = 1, kGamma = 2, kV = 3 };
inline constexpr std::array<const char*, 4> kComponentNames = {"x", "p",
                                                               "gamma", "v"};

// (sigma2_x, sigma2_p, sigma2_gamma, sigma2_v) for one bin.
using Variances = Eigen::Vector4d;
using VarianceVector = std::vector<Variances>;

// Unit-power spatial structure of the four modelled components at one bin.
struct ComponentMatrices {
  CMatrix desired;
  CMatrix interferer;
  CMatrix isotropic;
  CMatrix white;

  const CMatrix& operator[](std::size_t z) const;
};

// Everything the variance fit needs per bin: the observed covariance, its
// epsilon-adjusted copy and the four model components.
class BinCovarianceSet {
 public:
  BinCovarianceSet(const SensorArray& array, BinMatrices observed,
                   const Doa& desired, const Doa& interferer,
                   double epsilon = kDefaultEpsilon);

  std::size_t bins() const { return observed_.size(); }
  std::size_t sensors() const { return sensors_; }
  double epsilon() const { return epsilon_; }
  const Doa& desired_doa() const { return desired_doa_; }
  const Doa& interferer_doa() const { return interferer_doa_; }

  const CMatrix& observed(std::size_t k) const { return observed_[k]; }
  const CMatrix& adjusted(std::size_t k) const { return adjusted_[k]; }
  const ComponentMatrices& components(std::size_t k) const {
    return components_[k];
  }
  const BinMatrices& observed() const { return observed_; }

  // Rebuilds only the interferer component for a new direction.
  void set_interferer(const SensorArray& array, const Doa& interferer);

 private:
  std::size_t sensors_;
  double epsilon_;
  Doa desired_doa_;
  Doa interferer_doa_;
  BinMatrices observed_;
  BinMatrices adjusted_;
  std::vector<ComponentMatrices> components_;
};

// R_y[k] = (1/L) sum_l y[l,k] y[l,k]^H.
BinMatrices sample_covariance(const SpectralFrames& frames);

// R_yhat = sum_z sigma_z Rbar_z + eps I.
CMatrix model_covariance(const Variances& sigma, const ComponentMatrices& comps,
                         double epsilon);
BinMatrices model_covariance(const VarianceVector& sigma,
                             const BinCovarianceSet& set);

// Same sum without the desired term.
CMatrix assemble_ncm(const Variances& sigma, const ComponentMatrices& comps,
                     double epsilon);
BinMatrices assemble_ncm(const VarianceVector& sigma,
                         const BinCovarianceSet& set);

// Writes <stem>.bin (interleaved little-endian float64 re/im, bin-major,
// column-major within a bin) and <stem>.json describing the layout.
void export_matrices(const std::filesystem::path& stem,
                     const BinMatrices& matrices, const std::string& label);
BinMatrices import_matrices(const std::filesystem::path& stem);

}  // namespace ncmdoa

#endif  // NCMDOA_COVARIANCE_HPP_
