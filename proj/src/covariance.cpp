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

#include "ncmdoa/covariance.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ncmdoa/error.hpp"
#include "ncmdoa/io_util.hpp"

namespace ncmdoa {

namespace {

void check_variances(const Variances& sigma) {
  for (std::size_t z = 0; z < 4; ++z) {
    if (!(sigma[z] >= 0.0) || !std::isfinite(sigma[z])) {
      fail(ErrorCode::kInvalidArgument,
           std::string("variance of component ") + kComponentNames[z] +
               " must be finite and non-negative");
    }
  }
}

}  // namespace

const CMatrix& ComponentMatrices::operator[](std::size_t z) const {
  switch (z) {
    case kX:
      return desired;
    case kP:
      return interferer;
    case kGamma:
      return isotropic;
    default:
      return white;
  }
}

BinCovarianceSet::BinCovarianceSet(const SensorArray& array,
                                   BinMatrices observed, const Doa& desired,
                                   const Doa& interferer, double epsilon)
    : sensors_(array.size()),
      epsilon_(epsilon),
      desired_doa_(desired),
      interferer_doa_(interferer),
      observed_(std::move(observed)) {
  require(epsilon >= 0.0, "epsilon must be non-negative");
  require(observed_.size() == array.bin_count(),
          "observed covariance bin count does not match the array");
  const auto m = static_cast<Eigen::Index>(sensors_);
  adjusted_.reserve(observed_.size());
  components_.reserve(observed_.size());
  const CMatrix white = white_pseudocov(sensors_).matrix;
  for (std::size_t k = 0; k < observed_.size(); ++k) {
    require(observed_[k].rows() == m && observed_[k].cols() == m,
            "observed covariance has the wrong size");
    adjusted_.push_back(observed_[k] - epsilon_ * CMatrix::Identity(m, m));
    components_.push_back(ComponentMatrices{
        directional_pseudocov(steering_vector(array, desired, k),
                              CovarianceKind::kDesired)
            .matrix,
        directional_pseudocov(steering_vector(array, interferer, k),
                              CovarianceKind::kInterferer)
            .matrix,
        isotropic_pseudocov(array, k).matrix, white});
  }
}

void BinCovarianceSet::set_interferer(const SensorArray& array,
                                      const Doa& interferer) {
  interferer_doa_ = interferer;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    components_[k].interferer =
        directional_pseudocov(steering_vector(array, interferer, k),
                              CovarianceKind::kInterferer)
            .matrix;
  }
}

BinMatrices sample_covariance(const SpectralFrames& frames) {
  if (frames.windows() == 0) {
    fail(ErrorCode::kInvalidArgument, "sample covariance needs at least one frame");
  }
  const double inv = 1.0 / static_cast<double>(frames.windows());
  BinMatrices out;
  out.reserve(frames.bins());
  for (std::size_t k = 0; k < frames.bins(); ++k) {
    const CMatrix& y = frames.bin(k);
    CMatrix r = inv * (y * y.adjoint());
    // Exact Hermitian symmetry regardless of summation order.
    r = 0.5 * (r + r.adjoint()).eval();
    out.push_back(std::move(r));
  }
  return out;
}

CMatrix model_covariance(const Variances& sigma, const ComponentMatrices& comps,
                         double epsilon) {
  CMatrix r = assemble_ncm(sigma, comps, epsilon);
  r += sigma[kX] * comps.desired;
  return r;
}

CMatrix assemble_ncm(const Variances& sigma, const ComponentMatrices& comps,
                     double epsilon) {
  check_variances(sigma);
  const auto m = comps.white.rows();
  CMatrix r = sigma[kP] * comps.interferer + sigma[kGamma] * comps.isotropic +
              sigma[kV] * comps.white;
  r += epsilon * CMatrix::Identity(m, m);
  return r;
}

BinMatrices model_covariance(const VarianceVector& sigma,
                             const BinCovarianceSet& set) {
  require(sigma.size() == set.bins(), "variance vector bin count mismatch");
  BinMatrices out;
  out.reserve(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out.push_back(model_covariance(sigma[k], set.components(k), set.epsilon()));
  }
  return out;
}

BinMatrices assemble_ncm(const VarianceVector& sigma,
                         const BinCovarianceSet& set) {
  require(sigma.size() == set.bins(), "variance vector bin count mismatch");
  BinMatrices out;
  out.reserve(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out.push_back(assemble_ncm(sigma[k], set.components(k), set.epsilon()));
  }
  return out;
}

void export_matrices(const std::filesystem::path& stem,
                     const BinMatrices& matrices, const std::string& label) {
  require(!matrices.empty(), "nothing to export");
  const auto rows = matrices.front().rows();
  const auto cols = matrices.front().cols();
  std::vector<double> data;
  data.reserve(matrices.size() * static_cast<std::size_t>(rows * cols) * 2);
  for (const auto& m : matrices) {
    require(m.rows() == rows && m.cols() == cols,
            "exported matrices must share one shape");
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        data.push_back(m(i, j).real());
        data.push_back(m(i, j).imag());
      }
    }
  }
  nlohmann::json meta = {{"label", label},
                         {"dtype", "float64"},
                         {"endianness", "little"},
                         {"layout", "bin-major, column-major, re/im interleaved"},
                         {"bins", matrices.size()},
                         {"rows", rows},
                         {"cols", cols},
                         {"data", stem.filename().string() + ".bin"}};
  write_binary_atomic(std::filesystem::path(stem.string() + ".bin"), data);
  write_text_atomic(std::filesystem::path(stem.string() + ".json"),
                    meta.dump(2) + "\n");
}

BinMatrices import_matrices(const std::filesystem::path& stem) {
  const auto meta = read_json(std::filesystem::path(stem.string() + ".json"));
  const auto bins = meta.at("bins").get<std::size_t>();
  const auto rows = meta.at("rows").get<Eigen::Index>();
  const auto cols = meta.at("cols").get<Eigen::Index>();
  const auto data = read_binary(std::filesystem::path(stem.string() + ".bin"));
  if (data.size() != bins * static_cast<std::size_t>(rows * cols) * 2) {
    fail(ErrorCode::kIo, stem.string() + ".bin has the wrong size");
  }
  BinMatrices out(bins, CMatrix(rows, cols));
  std::size_t p = 0;
  for (auto& m : out) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i, p += 2) {
        m(i, j) = Complex(data[p], data[p + 1]);
      }
    }
  }
  return out;
}

}  // namespace ncmdoa
