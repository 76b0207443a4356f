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

#ifndef NCMDOA_DOA_ESTIMATOR_HPP_
#define NCMDOA_DOA_ESTIMATOR_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncmdoa/array_geometry.hpp"
#include "ncmdoa/covariance.hpp"
#include "ncmdoa/variance_solver.hpp"

namespace ncmdoa {

enum class GradientForm { kAuto, kFull, kGeneral, kPlanar, kLinear };

GradientForm parse_gradient_form(const std::string& name);
std::string to_string(GradientForm form);

// Observed covariances plus the fixed model components, restricted to the
// estimation band. The interferer component is rebuilt whenever the
// candidate direction changes, so a problem is not shareable across threads.
class DoaProblem {
 public:
  // bins defaults to 1 .. N/2-1: DC carries no spatial information and the
  // Nyquist bin is real-valued.
  DoaProblem(SensorArray array, BinMatrices observed, const Doa& desired,
             double epsilon = kDefaultEpsilon,
             std::vector<std::size_t> bins = {});

  const SensorArray& array() const { return array_; }
  const RelativeGeometry& geometry() const { return geometry_; }
  const Doa& desired() const { return desired_; }
  double epsilon() const { return epsilon_; }
  const std::vector<std::size_t>& bins() const { return bins_; }
  std::size_t band_size() const { return bins_.size(); }
  const BinMatrices& observed_all() const { return observed_; }

  // Indexed by band position.
  const CMatrix& observed(std::size_t b) const { return observed_[bins_[b]]; }
  const CMatrix& adjusted(std::size_t b) const { return adjusted_[b]; }
  const ComponentMatrices& components(std::size_t b) const {
    return comps_[b];
  }

  void set_interferer(const Doa& doa);
  const Doa& interferer() const { return interferer_; }

  // Sum over the band of ||R_y||_F^2; tolerances are relative to it.
  double scale() const { return scale_; }

 private:
  SensorArray array_;
  RelativeGeometry geometry_;
  Doa desired_;
  double epsilon_;
  std::vector<std::size_t> bins_;
  BinMatrices observed_;
  BinMatrices adjusted_;
  std::vector<ComponentMatrices> comps_;
  Doa interferer_;
  bool have_interferer_ = false;
  double scale_ = 0.0;
};

// Constrained variance fit for every band bin at the given direction.
VarianceVector solve_variances(DoaProblem& problem, const Doa& interferer,
                               std::vector<ActiveSetState>* states = nullptr);

// sum_b ||R_yhat(sigma_b, doa) - R_y[b]||_F^2 over the band.
double broadband_cost(DoaProblem& problem, const VarianceVector& sigma,
                      const Doa& interferer);

struct DoaGradient {
  double azimuth = 0.0;
  double elevation = 0.0;
};

// Sign convention: the cost decreases along -gradient for every form. The
// full form is the exact derivative,
//   dJ/dtheta = -c0 2cos(phi) sum_{i<j} sin(theta-psi) cos(lambda) G_ij
//   dJ/dphi   = -c0 2 sum_{i<j} [sin(phi)cos(lambda)cos(theta-psi)
//                                - cos(phi)sin(lambda)] G_ij
// with c0 = 4pi f0/(N c) and (r, psi, lambda) the coordinates of p_i - p_j.
// The general form drops the leading cos(phi)/sin(phi) magnitudes, the
// planar form additionally drops cos(lambda), and the linear form keeps
// only sum G with every pair oriented along the array axis. Dropped factors
// contribute their sign so every form points the same way as the full one.
DoaGradient doa_gradient(DoaProblem& problem, const VarianceVector& sigma,
                         const Doa& interferer, GradientForm form);

// G for the pair vector p_i - p_j:
// r_ij sum_b k sigma_p[b] Im(conj(Rhat_ij[b]) Rbar_p;ij[b]).
double pair_term(DoaProblem& problem, const VarianceVector& sigma,
                 const Doa& interferer, std::size_t i, std::size_t j);

struct DescentConfig {
  // Prior estimate; without one, multi_starts equally spaced azimuths are
  // used.
  std::optional<Doa> initial;
  // Azimuth offsets (rad) applied to the prior, one descent per offset.
  std::vector<double> start_offsets = {0.0};
  int multi_starts = 8;
  double step = 0.05;
  double contraction = 0.5;
  double armijo = 1e-4;
  double min_step = 1e-10;
  int max_iterations = 200;
  // Relative to DoaProblem::scale().
  double tol_grad = 1e-6;
  double exclusion = deg2rad(5.0);
  GradientForm form = GradientForm::kAuto;
  // Unset: estimated only when the array is not horizontal.
  std::optional<bool> estimate_elevation;
  // DoA steps taken between variance re-solves.
  int inner_steps = 5;
  int max_outer = 100;
};

struct DescentResult {
  Doa doa;
  double cost = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Armijo-backtracked descent on the direction only, variances frozen.
DescentResult descend_doa(DoaProblem& problem, const VarianceVector& sigma,
                          const Doa& start, const DescentConfig& cfg);

struct JointEstimate {
  // All K bins; bins outside the band hold zeros and use R_y as NCM.
  VarianceVector sigma;
  Doa interferer;
  BinMatrices ncm;
  std::vector<bool> in_band;
  std::vector<ActiveSetState> states;
  double cost = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  // The interferer variance is numerically absent, so the direction is
  // not identifiable.
  bool low_confidence = false;
  Doa start;
};

using TraceSink = std::function<void(const nlohmann::json&)>;

// Alternates the constrained variance fit with direction descent until the
// gradient falls under tolerance, then assembles the NCM. Runs once per
// start and keeps the lowest-cost result.
JointEstimate joint_estimate(DoaProblem& problem, const DescentConfig& cfg,
                             const TraceSink& trace = {});

// Azimuth of the equivalent horizontal direction seen by a linear array.
double reduce_to_azimuth(double azimuth, double elevation);

// Angle between two directions as unit vectors.
double angular_distance(const Doa& a, const Doa& b);

}  // namespace ncmdoa

#endif  // NCMDOA_DOA_ESTIMATOR_HPP_
