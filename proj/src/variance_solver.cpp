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

#include "ncmdoa/variance_solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "ncmdoa/error.hpp"

namespace ncmdoa {

namespace {

double frobenius_re(const CMatrix& a, const CMatrix& b) {
  // Re<a, b>_F = sum_ij Re a_ij Re b_ij + Im a_ij Im b_ij.
  return (a.array().real() * b.array().real() +
          a.array().imag() * b.array().imag())
      .sum();
}

struct Candidate {
  Variances sigma = Variances::Zero();
  bool feasible = false;
};

// Solves the reduced system with the clamped rows and columns removed.
Candidate reduced_solve(const Eigen::Matrix4d& a, const Eigen::Vector4d& q,
                        ActiveMask active, double tol) {
  Candidate c;
  int idx[4];
  int n = 0;
  for (int z = 0; z < 4; ++z) {
    if (!((active >> z) & 1u)) idx[n++] = z;
  }
  if (n > 0) {
    Eigen::MatrixXd ar(n, n);
    Eigen::VectorXd qr(n);
    for (int i = 0; i < n; ++i) {
      qr[i] = q[idx[i]];
      for (int j = 0; j < n; ++j) ar(i, j) = a(idx[i], idx[j]);
    }
    const Eigen::VectorXd s = ar.ldlt().solve(qr);
    for (int i = 0; i < n; ++i) c.sigma[idx[i]] = s[i];
  }
  c.feasible = (c.sigma.array() >= -tol).all();
  return c;
}

bool subset_of(ActiveMask a, ActiveMask b) { return (a & ~b) == 0; }

// Clamp patterns ordered by cardinality, then lexicographically over
// (x, p, gamma, v) with x most significant.
const std::vector<ActiveMask>& pattern_order() {
  static const std::vector<ActiveMask> order = [] {
    std::vector<ActiveMask> v;
    for (int m = 0; m < 16; ++m) v.push_back(static_cast<ActiveMask>(m));
    const auto lex_key = [](ActiveMask m) {
      // Reverse bit order so component x sorts first.
      int key = 0;
      for (int z = 0; z < 4; ++z) {
        if ((m >> z) & 1u) key |= 1 << (3 - z);
      }
      return key;
    };
    std::stable_sort(v.begin(), v.end(), [&](ActiveMask l, ActiveMask r) {
      const int cl = std::popcount(static_cast<unsigned>(l));
      const int cr = std::popcount(static_cast<unsigned>(r));
      if (cl != cr) return cl < cr;
      return lex_key(l) > lex_key(r);
    });
    return v;
  }();
  return order;
}

void finish(ActiveSetState& st, const Eigen::Matrix4d& a,
            const Eigen::Vector4d& q, const NormalSystem& sys) {
  for (int z = 0; z < 4; ++z) {
    if (st.is_active(z) || st.sigma[z] < 0.0) st.sigma[z] = 0.0;
  }
  const Variances grad = a * st.sigma - q;
  for (int z = 0; z < 4; ++z) st.zeta[z] = st.is_active(z) ? grad[z] : 0.0;
  st.cost = sys.cost(st.sigma);
}

double sigma_tol(const Variances& s) {
  return 1e-12 * std::max(1e-300, s.cwiseAbs().maxCoeff());
}

}  // namespace

Variances ActiveSetState::slack() const {
  Variances mu = Variances::Zero();
  for (int z = 0; z < 4; ++z) {
    if (!is_active(z)) mu[z] = sigma[z];
  }
  return mu;
}

NormalSystem build_system(const BinCovarianceSet& set, std::size_t bin) {
  return build_system(set.components(bin), set.adjusted(bin));
}

NormalSystem build_system(const ComponentMatrices& c, const CMatrix& ry) {
  NormalSystem sys;
  for (std::size_t w = 0; w < 4; ++w) {
    for (std::size_t z = w; z < 4; ++z) {
      const double v = 2.0 * frobenius_re(c[w], c[z]);
      sys.a(w, z) = v;
      sys.a(z, w) = v;
    }
    sys.q[w] = 2.0 * frobenius_re(ry, c[w]);
  }
  sys.offset = ry.squaredNorm();
  return sys;
}

Conditioned condition_system(const NormalSystem& sys) {
  const Eigen::Matrix4d& a = sys.a;
  for (int w = 0; w < 4; ++w) {
    if (!(a(w, w) > 0.0) || !std::isfinite(a(w, w))) {
      fail(ErrorCode::kDegenerateSystem,
           std::string("component ") + kComponentNames[w] +
               " has no spatial energy");
    }
  }
  for (int w = 0; w < 4; ++w) {
    for (int z = w + 1; z < 4; ++z) {
      const double cosine = a(w, z) / std::sqrt(a(w, w) * a(z, z));
      if (cosine >= 1.0 - 1e-12) {
        fail(ErrorCode::kDegenerateSystem,
             std::string("components ") + kComponentNames[w] + " and " +
                 kComponentNames[z] +
                 " are indistinguishable (e.g. interferer DoA equals "
                 "desired DoA)");
      }
    }
  }
  const auto condition = [](const Eigen::Matrix4d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m,
                                                      Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0];
    const double hi = es.eigenvalues()[3];
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  };
  Conditioned out{a, false};
  if (condition(a) < kMaxCondition) return out;
  out.a.diagonal().array() += 1e-10 * a.trace() / 4.0;
  out.loaded = true;
  if (!(condition(out.a) < kMaxCondition)) {
    fail(ErrorCode::kDegenerateSystem,
         "normal system stays ill-conditioned after diagonal loading");
  }
  return out;
}

Variances solve_unconstrained(const NormalSystem& sys) {
  const Conditioned c = condition_system(sys);
  return c.a.ldlt().solve(sys.q);
}

ActiveSetState solve_nonnegative(const NormalSystem& sys) {
  const Conditioned cond = condition_system(sys);
  const Eigen::Matrix4d& a = cond.a;
  const Eigen::Vector4d& q = sys.q;

  ActiveSetState st;
  st.loaded = cond.loaded;
  st.unconstrained = a.ldlt().solve(q);
  st.solves = 1;
  st.unconstrained_cost = sys.cost(st.unconstrained);

  ActiveMask negative = 0;
  for (int z = 0; z < 4; ++z) {
    if (st.unconstrained[z] < 0.0) negative |= static_cast<ActiveMask>(1u << z);
  }
  if (negative == 0) {
    st.sigma = st.unconstrained;
    finish(st, a, q, sys);
    return st;
  }

  const double tol_s = sigma_tol(st.unconstrained);
  const double tol_z = 1e-12 * std::max(1e-300, q.cwiseAbs().maxCoeff() +
                                                    a.cwiseAbs().maxCoeff() *
                                                        tol_s);
  const auto kkt = [&](const Candidate& c, ActiveMask m) {
    if (!c.feasible) return false;
    const Variances grad = a * c.sigma - q;
    for (int z = 0; z < 4; ++z) {
      if (((m >> z) & 1u) && grad[z] < -tol_z) return false;
    }
    return true;
  };

  // Feasible minimum kept as a fallback in case rounding defeats every
  // optimality test.
  Candidate best;
  ActiveMask best_mask = 0x0F;
  double best_cost = sys.offset;
  const auto consider = [&](ActiveMask m) -> bool {
    if (m == 0) return false;
    const Candidate c = reduced_solve(a, q, m, tol_s);
    if (m != 0x0F) ++st.solves;
    if (c.feasible) {
      Variances s = c.sigma.cwiseMax(0.0);
      const double cost = sys.cost(s);
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
        best_mask = m;
      }
    }
    if (kkt(c, m)) {
      st.active = m;
      st.sigma = c.sigma;
      return true;
    }
    return false;
  };

  for (ActiveMask m : pattern_order()) {
    if (subset_of(m, negative) && consider(m)) {
      finish(st, a, q, sys);
      return st;
    }
  }
  for (ActiveMask m : pattern_order()) {
    if (!subset_of(m, negative) && consider(m)) {
      finish(st, a, q, sys);
      return st;
    }
  }
  st.active = best_mask;
  st.sigma = best.sigma;
  finish(st, a, q, sys);
  return st;
}

nlohmann::json debug_json(std::size_t bin, const NormalSystem& sys,
                          const ActiveSetState& state) {
  nlohmann::json a = nlohmann::json::array();
  for (int w = 0; w < 4; ++w) {
    a.push_back({sys.a(w, 0), sys.a(w, 1), sys.a(w, 2), sys.a(w, 3)});
  }
  const auto vec = [](const Eigen::Vector4d& v) {
    return nlohmann::json::array({v[0], v[1], v[2], v[3]});
  };
  nlohmann::json active = nlohmann::json::array();
  for (int z = 0; z < 4; ++z) {
    if (state.is_active(z)) active.push_back(kComponentNames[z]);
  }
  return {{"bin", bin},
          {"A", a},
          {"q", vec(sys.q)},
          {"sigma_unconstrained", vec(state.unconstrained)},
          {"active", active},
          {"sigma", vec(state.sigma)},
          {"zeta", vec(state.zeta)},
          {"cost", state.cost},
          {"solves", state.solves},
          {"loaded", state.loaded}};
}

}  // namespace ncmdoa
