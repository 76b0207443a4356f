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

#ifndef NCMDOA_TYPES_HPP_
#define NCMDOA_TYPES_HPP_

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace ncmdoa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// One entry per frequency bin.
using BinMatrices = std::vector<CMatrix>;
using BinVectors = std::vector<CVector>;

// channels x samples, each channel stored contiguously.
using Multichannel = std::vector<std::vector<double>>;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double rad);

}  // namespace ncmdoa

#endif  // NCMDOA_TYPES_HPP_
