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

#include "ncmdoa/doa_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "ncmdoa/error.hpp"

namespace ncmdoa {

namespace {

GradientForm resolve_form(const DoaProblem& p, GradientForm form) {
  if (form != GradientForm::kAuto) return form;
  if (p.geometry().is_linear()) return GradientForm::kLinear;
  if (p.geometry().is_planar()) return GradientForm::kPlanar;
  return GradientForm::kFull;
}

bool resolve_elevation(const DoaProblem& p, const DescentConfig& cfg) {
  if (p.geometry().is_linear()) return false;
  if (cfg.estimate_elevation) return *cfg.estimate_elevation;
  return !p.geometry().is_planar();
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

// T(i, j) = sum_b k sigma_p[b] Im(conj(E_ij[b]) Rbar_p;ij[b]) with
// E = R_yhat - R_y.
Eigen::MatrixXd term_matrix(DoaProblem& p, const VarianceVector& sigma,
                            const Doa& doa) {
  require(sigma.size() == p.band_size(), "variance vector does not match band");
  p.set_interferer(doa);
  const auto m = static_cast<Eigen::Index>(p.array().size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t b = 0; b < p.band_size(); ++b) {
    const double sp = sigma[b][kP];
    if (sp == 0.0) continue;
    const ComponentMatrices& c = p.components(b);
    const CMatrix e =
        model_covariance(sigma[b], c, p.epsilon()) - p.observed(b);
    const double w = static_cast<double>(p.bins()[b]) * sp;
    t.array() += w * (e.array().conjugate() * c.interferer.array()).imag();
  }
  return t;
}

double prefactor(const DoaProblem& p) {
  const SensorArray& a = p.array();
  return 4.0 * kPi * a.sampling_rate() /
         (static_cast<double>(a.frame_length()) * a.wave_speed());
}

std::string mask_name(ActiveMask m) {
  if (m == 0) return "none";
  std::string s;
  for (int z = 0; z < 4; ++z) {
    if ((m >> z) & 1u) {
      if (!s.empty()) s += "+";
      s += kComponentNames[z];
    }
  }
  return s;
}

double restricted_norm(const DoaGradient& g, bool elevation) {
  return elevation ? std::hypot(g.azimuth, g.elevation) : std::abs(g.azimuth);
}

struct Walker {
  DoaProblem& problem;
  const DescentConfig& cfg;
  GradientForm form;
  bool elevation;
  double tol;

  bool excluded(const Doa& d) const {
    return angular_distance(d, problem.desired()) < cfg.exclusion;
  }

  // One backtracking step from `doa`; false when no admissible decrease
  // exists above the minimum step.
  bool step(const VarianceVector& sigma, Doa& doa, double& cost,
            const DoaGradient& full) const {
    DoaGradient dir = form == GradientForm::kFull
                          ? full
                          : doa_gradient(problem, sigma, doa, form);
    if (!elevation) dir.elevation = 0.0;
    DoaGradient g = full;
    if (!elevation) g.elevation = 0.0;
    if (dir.azimuth * g.azimuth + dir.elevation * g.elevation <= 0.0) dir = g;
    const double len = std::hypot(dir.azimuth, dir.elevation);
    if (!(len > 0.0)) return false;
    const double da = dir.azimuth / len;
    const double de = dir.elevation / len;
    // Directional derivative of the cost along the unit step.
    const double slope = -(g.azimuth * da + g.elevation * de);
    for (double alpha = cfg.step; alpha >= cfg.min_step;
         alpha *= cfg.contraction) {
      const Doa trial =
          Doa{doa.azimuth - alpha * da, doa.elevation - alpha * de}
              .normalized();
      if (excluded(trial)) continue;
      const double c = broadband_cost(problem, sigma, trial);
      if (c <= cost + cfg.armijo * alpha * slope) {
        doa = trial;
        cost = c;
        return true;
      }
    }
    return false;
  }
};

}  // namespace

GradientForm parse_gradient_form(const std::string& name) {
  if (name == "auto") return GradientForm::kAuto;
  if (name == "full") return GradientForm::kFull;
  if (name == "general") return GradientForm::kGeneral;
  if (name == "planar") return GradientForm::kPlanar;
  if (name == "linear") return GradientForm::kLinear;
  fail(ErrorCode::kConfig, "unknown gradient form '" + name +
                               "' (auto|full|general|planar|linear)");
}

std::string to_string(GradientForm form) {
  switch (form) {
    case GradientForm::kAuto:
      return "auto";
    case GradientForm::kFull:
      return "full";
    case GradientForm::kGeneral:
      return "general";
    case GradientForm::kPlanar:
      return "planar";
    case GradientForm::kLinear:
      return "linear";
  }
  return "auto";
}

DoaProblem::DoaProblem(SensorArray array, BinMatrices observed,
                       const Doa& desired, double epsilon,
                       std::vector<std::size_t> bins)
    : array_(std::move(array)),
      geometry_(relative_geometry(array_)),
      desired_(desired.normalized()),
      epsilon_(epsilon),
      bins_(std::move(bins)),
      observed_(std::move(observed)) {
  require(epsilon_ >= 0.0, "epsilon must be non-negative");
  require(observed_.size() == array_.bin_count(),
          "observed covariance bin count does not match the array");
  if (bins_.empty()) {
    for (std::size_t k = 1; k + 1 < array_.bin_count(); ++k) bins_.push_back(k);
  }
  const auto m = static_cast<Eigen::Index>(array_.size());
  const CMatrix white = white_pseudocov(array_.size()).matrix;
  for (std::size_t k : bins_) {
    require(k < array_.bin_count(), "estimation bin out of range");
    const CMatrix& ry = observed_[k];
    require(ry.rows() == m && ry.cols() == m,
            "observed covariance has the wrong size");
    adjusted_.push_back(ry - epsilon_ * CMatrix::Identity(m, m));
    comps_.push_back(ComponentMatrices{
        directional_pseudocov(steering_vector(array_, desired_, k),
                              CovarianceKind::kDesired)
            .matrix,
        CMatrix::Zero(m, m), isotropic_pseudocov(array_, k).matrix, white});
    scale_ += ry.squaredNorm();
  }
  if (!(scale_ > 0.0)) scale_ = 1.0;
}

void DoaProblem::set_interferer(const Doa& doa) {
  if (have_interferer_ && doa.azimuth == interferer_.azimuth &&
      doa.elevation == interferer_.elevation) {
    return;
  }
  for (std::size_t b = 0; b < bins_.size(); ++b) {
    comps_[b].interferer =
        directional_pseudocov(steering_vector(array_, doa, bins_[b]),
                              CovarianceKind::kInterferer)
            .matrix;
  }
  interferer_ = doa;
  have_interferer_ = true;
}

VarianceVector solve_variances(DoaProblem& problem, const Doa& interferer,
                               std::vector<ActiveSetState>* states) {
  problem.set_interferer(interferer);
  VarianceVector sigma(problem.band_size());
  if (states) states->assign(problem.band_size(), {});
  for (std::size_t b = 0; b < problem.band_size(); ++b) {
    const NormalSystem sys =
        build_system(problem.components(b), problem.adjusted(b));
    ActiveSetState st = solve_nonnegative(sys);
    sigma[b] = st.sigma;
    if (states) (*states)[b] = std::move(st);
  }
  return sigma;
}

double broadband_cost(DoaProblem& problem, const VarianceVector& sigma,
                      const Doa& interferer) {
  require(sigma.size() == problem.band_size(),
          "variance vector does not match band");
  problem.set_interferer(interferer);
  double cost = 0.0;
  for (std::size_t b = 0; b < problem.band_size(); ++b) {
    cost += (model_covariance(sigma[b], problem.components(b),
                              problem.epsilon()) -
             problem.observed(b))
                .squaredNorm();
  }
  return cost;
}

double pair_term(DoaProblem& problem, const VarianceVector& sigma,
                 const Doa& interferer, std::size_t i, std::size_t j) {
  const Eigen::MatrixXd t = term_matrix(problem, sigma, interferer);
  return problem.geometry().pair(j, i).distance *
         t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

DoaGradient doa_gradient(DoaProblem& problem, const VarianceVector& sigma,
                         const Doa& interferer, GradientForm form) {
  form = resolve_form(problem, form);
  const Eigen::MatrixXd t = term_matrix(problem, sigma, interferer);
  const RelativeGeometry& geo = problem.geometry();
  const double th = interferer.azimuth;
  const double ph = interferer.elevation;
  const double c0 = -2.0 * prefactor(problem);
  const std::size_t m = geo.size();

  DoaGradient g;
  if (form == GradientForm::kLinear) {
    const double axis = geo.axis_azimuth();
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const Spherical& v = geo.pair(j, i);
        const double gij = v.distance * t(i, j);
        sum += std::cos(v.azimuth - axis) >= 0.0 ? gij : -gij;
      }
    }
    g.azimuth = c0 * sign_of(std::sin(th - axis)) * sum;
    return g;
  }

  double s_theta = 0.0, s_phi = 0.0, s_lambda = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const Spherical& v = geo.pair(j, i);
      const double gij = v.distance * t(i, j);
      const double cl =
          form == GradientForm::kPlanar ? 1.0 : std::cos(v.elevation);
      s_theta += std::sin(th - v.azimuth) * cl * gij;
      s_phi += std::cos(th - v.azimuth) * cl * gij;
      s_lambda += std::sin(v.elevation) * gij;
    }
  }
  if (form == GradientForm::kFull) {
    g.azimuth = c0 * std::cos(ph) * s_theta;
    g.elevation = c0 * (std::sin(ph) * s_phi - std::cos(ph) * s_lambda);
  } else {
    g.azimuth = c0 * s_theta;
    g.elevation = c0 * sign_of(std::sin(ph)) * s_phi;
  }
  return g;
}

DescentResult descend_doa(DoaProblem& problem, const VarianceVector& sigma,
                          const Doa& start, const DescentConfig& cfg) {
  require(cfg.step > 0.0 && cfg.tol_grad > 0.0 && cfg.max_iterations >= 1,
          "invalid descent configuration");
  const Walker walk{problem, cfg, resolve_form(problem, cfg.form),
                    resolve_elevation(problem, cfg),
                    cfg.tol_grad * problem.scale()};
  DescentResult r;
  r.doa = start.normalized();
  r.cost = broadband_cost(problem, sigma, r.doa);
  for (; r.iterations < cfg.max_iterations; ++r.iterations) {
    const DoaGradient g =
        doa_gradient(problem, sigma, r.doa, GradientForm::kFull);
    r.gradient_norm = restricted_norm(g, walk.elevation);
    if (r.gradient_norm <= walk.tol) {
      r.converged = true;
      return r;
    }
    if (!walk.step(sigma, r.doa, r.cost, g)) break;
  }
  const DoaGradient g = doa_gradient(problem, sigma, r.doa, GradientForm::kFull);
  r.gradient_norm = restricted_norm(g, walk.elevation);
  r.converged = r.gradient_norm <= walk.tol;
  return r;
}

namespace {

JointEstimate run_start(DoaProblem& problem, const DescentConfig& cfg,
                        const Doa& start, int start_index,
                        const TraceSink& trace) {
  const Walker walk{problem, cfg, resolve_form(problem, cfg.form),
                    resolve_elevation(problem, cfg),
                    cfg.tol_grad * problem.scale()};
  if (walk.excluded(start)) {
    fail(ErrorCode::kDegenerateSystem,
         "initial interferer direction lies within the exclusion radius of "
         "the desired direction");
  }
  JointEstimate est;
  est.start = start;
  Doa doa = start;
  std::vector<ActiveSetState> states;
  VarianceVector sigma = solve_variances(problem, doa, &states);
  double cost = broadband_cost(problem, sigma, doa);

  const auto emit = [&](int outer, double gnorm) {
    if (!trace) return;
    std::map<std::string, int> hist;
    for (const auto& s : states) ++hist[mask_name(s.active)];
    trace({{"start", start_index},
           {"outer", outer},
           {"iterations", est.iterations},
           {"cost", cost},
           {"azimuth_deg", rad2deg(doa.azimuth)},
           {"elevation_deg", rad2deg(doa.elevation)},
           {"gradient", gnorm},
           {"active_histogram", hist}});
  };

  double gnorm = 0.0;
  for (est.outer_iterations = 0; est.outer_iterations < cfg.max_outer;
       ++est.outer_iterations) {
    DoaGradient g = doa_gradient(problem, sigma, doa, GradientForm::kFull);
    gnorm = restricted_norm(g, walk.elevation);
    emit(est.outer_iterations, gnorm);
    if (gnorm <= walk.tol) {
      est.converged = true;
      break;
    }
    const Doa before = doa;
    bool moved = false;
    for (int s = 0; s < cfg.inner_steps && est.iterations < cfg.max_iterations;
         ++s) {
      if (s > 0) {
        g = doa_gradient(problem, sigma, doa, GradientForm::kFull);
        if (restricted_norm(g, walk.elevation) <= walk.tol) break;
      }
      if (!walk.step(sigma, doa, cost, g)) break;
      moved = true;
      ++est.iterations;
    }
    if (!moved) break;
    try {
      std::vector<ActiveSetState> next_states;
      VarianceVector next = solve_variances(problem, doa, &next_states);
      sigma = std::move(next);
      states = std::move(next_states);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateSystem) throw;
      doa = before;
      problem.set_interferer(doa);
      break;
    }
    cost = broadband_cost(problem, sigma, doa);
    if (est.iterations >= cfg.max_iterations) {
      ++est.outer_iterations;
      break;
    }
  }
  const DoaGradient g = doa_gradient(problem, sigma, doa, GradientForm::kFull);
  est.gradient_norm = restricted_norm(g, walk.elevation);
  est.converged = est.gradient_norm <= walk.tol;
  est.interferer = doa;
  est.cost = broadband_cost(problem, sigma, doa);
  est.states = std::move(states);
  est.sigma = std::move(sigma);
  return est;
}

}  // namespace

JointEstimate joint_estimate(DoaProblem& problem, const DescentConfig& cfg,
                             const TraceSink& trace) {
  require(cfg.step > 0.0 && cfg.tol_grad > 0.0 && cfg.max_iterations >= 1 &&
              cfg.max_outer >= 1 && cfg.inner_steps >= 1,
          "invalid descent configuration");
  std::vector<Doa> starts;
  if (cfg.initial) {
    for (double off : cfg.start_offsets) {
      starts.push_back(
          Doa{cfg.initial->azimuth + off, cfg.initial->elevation}.normalized());
    }
  } else {
    require(cfg.multi_starts >= 1, "multi_starts must be at least 1");
    const int n = cfg.multi_starts;
    for (int i = 0; i < n; ++i) {
      starts.push_back(Doa{problem.desired().azimuth +
                               (i + 0.5) * 2.0 * kPi / n,
                           problem.desired().elevation}
                           .normalized());
    }
  }
  require(!starts.empty(), "no descent starts configured");

  JointEstimate best;
  bool have = false;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    JointEstimate est =
        run_start(problem, cfg, starts[s], static_cast<int>(s), trace);
    if (!have || est.cost < best.cost) {
      best = std::move(est);
      have = true;
    }
  }

  // Expand to every bin and assemble the NCM.
  const std::size_t k_all = problem.array().bin_count();
  VarianceVector band_sigma = std::move(best.sigma);
  best.sigma.assign(k_all, Variances::Zero());
  best.in_band.assign(k_all, false);
  best.ncm = problem.observed_all();
  problem.set_interferer(best.interferer);
  double sp = 0.0, total = 0.0;
  for (std::size_t b = 0; b < problem.band_size(); ++b) {
    const std::size_t k = problem.bins()[b];
    best.sigma[k] = band_sigma[b];
    best.in_band[k] = true;
    best.ncm[k] =
        assemble_ncm(band_sigma[b], problem.components(b), problem.epsilon());
    sp += band_sigma[b][kP];
    total += band_sigma[b].sum();
  }
  best.low_confidence = !(sp > 1e-9 * total);
  return best;
}

double reduce_to_azimuth(double azimuth, double elevation) {
  return std::acos(
      std::clamp(std::cos(azimuth) * std::cos(elevation), -1.0, 1.0));
}

double angular_distance(const Doa& a, const Doa& b) {
  return std::acos(std::clamp(a.unit().dot(b.unit()), -1.0, 1.0));
}

}  // namespace ncmdoa
