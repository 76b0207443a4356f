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

#ifndef NCMDOA_ARRAY_GEOMETRY_HPP_
#define NCMDOA_ARRAY_GEOMETRY_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ncmdoa/types.hpp"

namespace ncmdoa {

// Distance (m), azimuth and elevation (rad) of a displacement vector.
struct Spherical {
  double distance = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
};

Spherical to_spherical(const Eigen::Vector3d& v);

// Direction of arrival. Azimuth in (-pi, pi], elevation in [-pi/2, pi/2].
// The direction points from the array towards the source.
struct Doa {
  double azimuth = 0.0;
  double elevation = 0.0;

  static Doa from_degrees(double azimuth_deg, double elevation_deg = 0.0);
  Doa normalized() const;
  Eigen::Vector3d unit() const;
};

// Omnidirectional sensors at fixed Cartesian positions plus the sampling
// setup that fixes which frequency each STFT bin represents.
class SensorArray {
 public:
  SensorArray(std::vector<Eigen::Vector3d> sensors, std::size_t reference,
              double sampling_rate, std::size_t frame_length,
              double wave_speed = 343.0);

  // {"sensors": [[x,y,z],...], "reference": 0, "f0": 16000, "bins": 64,
  //  "c": 343.0}. "bins" counts the unique non-Nyquist bins, so the frame
  // length defaults to 2*bins; an explicit "frame_length" overrides it.
  static SensorArray from_json(const nlohmann::json& doc);
  static SensorArray load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // rows x cols grid in the z = 0 plane, row-major, sensor 0 at the origin.
  static SensorArray uniform_rectangular(std::size_t rows, std::size_t cols,
                                         double spacing, double sampling_rate,
                                         std::size_t frame_length);
  // Line along +x, sensor 0 at the origin.
  static SensorArray uniform_linear(std::size_t count, double spacing,
                                    double sampling_rate,
                                    std::size_t frame_length);

  std::size_t size() const { return sensors_.size(); }
  std::size_t reference() const { return reference_; }
  double sampling_rate() const { return sampling_rate_; }
  std::size_t frame_length() const { return frame_length_; }
  // One-sided bin count, frame_length/2 + 1.
  std::size_t bin_count() const { return frame_length_ / 2 + 1; }
  double wave_speed() const { return wave_speed_; }
  double bin_frequency(std::size_t bin) const {
    return static_cast<double>(bin) * sampling_rate_ /
           static_cast<double>(frame_length_);
  }

  const std::vector<Eigen::Vector3d>& positions() const { return sensors_; }
  const Eigen::Vector3d& position(std::size_t m) const { return sensors_[m]; }
  // Position of sensor m relative to the reference sensor.
  Eigen::Vector3d offset(std::size_t m) const {
    return sensors_[m] - sensors_[reference_];
  }
  Eigen::Vector3d centroid() const;

 private:
  std::vector<Eigen::Vector3d> sensors_;
  std::size_t reference_;
  double sampling_rate_;
  std::size_t frame_length_;
  double wave_speed_;
};

// Pairwise relative spherical coordinates. pair(i, j) describes the vector
// from sensor i to sensor j, so pair(j, i) has the same distance, azimuth
// shifted by pi and negated elevation.
class RelativeGeometry {
 public:
  std::size_t size() const { return size_; }
  const Spherical& pair(std::size_t i, std::size_t j) const {
    return pairs_[i * size_ + j];
  }
  // Coordinates of sensor m seen from the reference sensor.
  const Spherical& sensor(std::size_t m) const { return sensors_[m]; }

  // Every sensor in one horizontal plane (all pair elevations zero).
  bool is_planar() const { return planar_; }
  // Every sensor on one horizontal line.
  bool is_linear() const { return linear_; }
  // For linear arrays: azimuth of the array axis.
  double axis_azimuth() const { return axis_azimuth_; }

 private:
  friend RelativeGeometry relative_geometry(const SensorArray& array);
  std::size_t size_ = 0;
  std::vector<Spherical> pairs_;
  std::vector<Spherical> sensors_;
  bool planar_ = false;
  bool linear_ = false;
  double axis_azimuth_ = 0.0;
};

// Throws kDegenerateGeometry when two distinct sensors coincide.
RelativeGeometry relative_geometry(const SensorArray& array);

// Far-field path-length difference u(doa) . (p_m - p_ref) for every sensor.
Eigen::VectorXd projected_offsets(const SensorArray& array, const Doa& doa);

// Relative frequency responses from the reference sensor to every sensor:
// exp(-j 2pi f_k/c * r_m [cos(phi)cos(lambda_m)cos(theta-psi_m) +
// sin(phi)sin(lambda_m)]). For horizontal arrays (lambda_m = 0) the bracket
// reduces to cos(theta-psi_m)cos(phi-lambda_m).
CVector steering_vector(const SensorArray& array, const Doa& doa,
                        std::size_t bin);
BinVectors steering_vectors(const SensorArray& array, const Doa& doa);

enum class CovarianceKind { kDesired, kInterferer, kIsotropic, kWhite };

struct PseudoCovariance {
  CovarianceKind kind;
  CMatrix matrix;
};

// Spherically isotropic field coherence, sinc(2pi f r_ij / c).
Eigen::MatrixXd isotropic_coherence(std::span<const Eigen::Vector3d> positions,
                                    double frequency, double wave_speed);
PseudoCovariance isotropic_pseudocov(const SensorArray& array,
                                     std::size_t bin);
// sv sv^H. Entry (i, j) depends on the pair vector from sensor j to sensor i.
PseudoCovariance directional_pseudocov(
    const CVector& sv, CovarianceKind kind = CovarianceKind::kInterferer);
PseudoCovariance white_pseudocov(std::size_t sensors);

// sin(x)/x with sinc(0) = 1.
double sinc(double x);

}  // namespace ncmdoa

#endif  // NCMDOA_ARRAY_GEOMETRY_HPP_
