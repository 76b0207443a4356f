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

#include "ncmdoa/array_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ncmdoa/error.hpp"

namespace ncmdoa {

namespace {

constexpr double kCoincidentTolerance = 1e-12;  // m
constexpr double kPlanarTolerance = 1e-12;       // m

}  // namespace

double wrap_angle(double rad) {
  double w = std::remainder(rad, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Spherical to_spherical(const Eigen::Vector3d& v) {
  Spherical s;
  s.distance = v.norm();
  if (s.distance == 0.0) return s;
  s.azimuth = std::atan2(v.y(), v.x());
  s.elevation = std::asin(std::clamp(v.z() / s.distance, -1.0, 1.0));
  return s;
}

Doa Doa::from_degrees(double azimuth_deg, double elevation_deg) {
  return Doa{deg2rad(azimuth_deg), deg2rad(elevation_deg)}.normalized();
}

Doa Doa::normalized() const {
  return Doa{wrap_angle(azimuth), std::clamp(elevation, -kPi / 2, kPi / 2)};
}

Eigen::Vector3d Doa::unit() const {
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

SensorArray::SensorArray(std::vector<Eigen::Vector3d> sensors,
                         std::size_t reference, double sampling_rate,
                         std::size_t frame_length, double wave_speed)
    : sensors_(std::move(sensors)),
      reference_(reference),
      sampling_rate_(sampling_rate),
      frame_length_(frame_length),
      wave_speed_(wave_speed) {
  require(sensors_.size() >= 2, "sensor array needs at least 2 sensors");
  for (const auto& p : sensors_) {
    require(p.allFinite(), "sensor positions must be finite");
  }
  require(reference_ < sensors_.size(), "reference sensor index out of range");
  require(std::isfinite(sampling_rate_) && sampling_rate_ > 0,
          "sampling rate must be positive");
  require(frame_length_ >= 2 && frame_length_ % 2 == 0,
          "frame length must be even and at least 2");
  require(std::isfinite(wave_speed_) && wave_speed_ > 0,
          "wave speed must be positive");
}

SensorArray SensorArray::from_json(const nlohmann::json& doc) {
  try {
    std::vector<Eigen::Vector3d> sensors;
    for (const auto& s : doc.at("sensors")) {
      require(s.is_array() && s.size() == 3,
              "each sensor must be an [x, y, z] triple");
      sensors.emplace_back(s[0].get<double>(), s[1].get<double>(),
                           s[2].get<double>());
    }
    const auto reference = doc.value("reference", std::size_t{0});
    const double f0 = doc.value("f0", 16000.0);
    const auto bins = doc.value("bins", std::size_t{64});
    const auto frame_length = doc.value("frame_length", 2 * bins);
    const double c = doc.value("c", 343.0);
    return SensorArray(std::move(sensors), reference, f0, frame_length, c);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("array geometry: ") + e.what());
  }
}

SensorArray SensorArray::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open array geometry " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

nlohmann::json SensorArray::to_json() const {
  nlohmann::json sensors = nlohmann::json::array();
  for (const auto& p : sensors_) sensors.push_back({p.x(), p.y(), p.z()});
  return {{"sensors", sensors},
          {"reference", reference_},
          {"f0", sampling_rate_},
          {"bins", frame_length_ / 2},
          {"frame_length", frame_length_},
          {"c", wave_speed_}};
}

SensorArray SensorArray::uniform_rectangular(std::size_t rows,
                                             std::size_t cols, double spacing,
                                             double sampling_rate,
                                             std::size_t frame_length) {
  std::vector<Eigen::Vector3d> sensors;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      sensors.emplace_back(static_cast<double>(c) * spacing,
                           static_cast<double>(r) * spacing, 0.0);
    }
  }
  return SensorArray(std::move(sensors), 0, sampling_rate, frame_length);
}

SensorArray SensorArray::uniform_linear(std::size_t count, double spacing,
                                        double sampling_rate,
                                        std::size_t frame_length) {
  std::vector<Eigen::Vector3d> sensors;
  for (std::size_t m = 0; m < count; ++m) {
    sensors.emplace_back(static_cast<double>(m) * spacing, 0.0, 0.0);
  }
  return SensorArray(std::move(sensors), 0, sampling_rate, frame_length);
}

Eigen::Vector3d SensorArray::centroid() const {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : sensors_) sum += p;
  return sum / static_cast<double>(sensors_.size());
}

RelativeGeometry relative_geometry(const SensorArray& array) {
  RelativeGeometry g;
  const std::size_t m = array.size();
  g.size_ = m;
  g.pairs_.resize(m * m);
  g.sensors_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    g.sensors_[i] = to_spherical(array.offset(i));
    for (std::size_t j = 0; j < m; ++j) {
      const Eigen::Vector3d v = array.position(j) - array.position(i);
      if (i != j && v.norm() <= kCoincidentTolerance) {
        std::ostringstream msg;
        msg << "sensors " << i << " and " << j << " coincide";
        fail(ErrorCode::kDegenerateGeometry, msg.str());
      }
      g.pairs_[i * m + j] = to_spherical(v);
    }
  }

  const double z0 = array.position(0).z();
  g.planar_ = std::all_of(
      array.positions().begin(), array.positions().end(),
      [&](const Eigen::Vector3d& p) {
        return std::abs(p.z() - z0) <= kPlanarTolerance;
      });

  if (g.planar_) {
    // Collinear when every offset from sensor 0 is parallel to the first
    // non-zero one.
    const Eigen::Vector3d axis =
        (array.position(1) - array.position(0)).normalized();
    g.linear_ = true;
    for (std::size_t i = 2; i < m; ++i) {
      const Eigen::Vector3d v = array.position(i) - array.position(0);
      if (v.cross(axis).norm() > kPlanarTolerance) {
        g.linear_ = false;
        break;
      }
    }
    if (g.linear_) g.axis_azimuth_ = std::atan2(axis.y(), axis.x());
  }
  return g;
}

Eigen::VectorXd projected_offsets(const SensorArray& array, const Doa& doa) {
  const Eigen::Vector3d u = doa.unit();
  Eigen::VectorXd s(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) s[m] = u.dot(array.offset(m));
  return s;
}

CVector steering_vector(const SensorArray& array, const Doa& doa,
                        std::size_t bin) {
  const Eigen::VectorXd s = projected_offsets(array, doa);
  const double wavenumber =
      2.0 * kPi * array.bin_frequency(bin) / array.wave_speed();
  CVector sv(array.size());
  for (std::size_t m = 0; m < array.size(); ++m) {
    sv[m] = m == array.reference() ? Complex{1.0, 0.0}
                                    : std::polar(1.0, -wavenumber * s[m]);
  }
  return sv;
}

BinVectors steering_vectors(const SensorArray& array, const Doa& doa) {
  BinVectors out;
  out.reserve(array.bin_count());
  for (std::size_t k = 0; k < array.bin_count(); ++k) {
    out.push_back(steering_vector(array, doa, k));
  }
  return out;
}

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

Eigen::MatrixXd isotropic_coherence(std::span<const Eigen::Vector3d> positions,
                                    double frequency, double wave_speed) {
  const std::size_t m = positions.size();
  const double wavenumber = 2.0 * kPi * frequency / wave_speed;
  Eigen::MatrixXd gamma(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    gamma(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      gamma(i, j) = gamma(j, i) =
          sinc(wavenumber * (positions[j] - positions[i]).norm());
    }
  }
  return gamma;
}

PseudoCovariance isotropic_pseudocov(const SensorArray& array,
                                     std::size_t bin) {
  return {CovarianceKind::kIsotropic,
          isotropic_coherence(array.positions(), array.bin_frequency(bin),
                              array.wave_speed())
              .cast<Complex>()};
}

PseudoCovariance directional_pseudocov(const CVector& sv,
                                       CovarianceKind kind) {
  require(kind == CovarianceKind::kDesired ||
              kind == CovarianceKind::kInterferer,
          "directional pseudo-covariance must be desired or interferer kind");
  return {kind, sv * sv.adjoint()};
}

PseudoCovariance white_pseudocov(std::size_t sensors) {
  return {CovarianceKind::kWhite, CMatrix::Identity(sensors, sensors)};
}

}  // namespace ncmdoa
