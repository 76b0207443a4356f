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

#ifndef NCMDOA_VARIANCE_SOLVER_HPP_
#define NCMDOA_VARIANCE_SOLVER_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ncmdoa/covariance.hpp"

namespace ncmdoa {

// Per-bin quadratic ||sum_z sigma_z Rbar_z - R_{y,eps}||_F^2 written as
// 0.5 s^T A s - q^T s + offset, with A[w][z] = 2 Re<Rbar_w, Rbar_z>_F and
// q[z] = 2 Re<R_{y,eps}, Rbar_z>_F.
struct NormalSystem {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  Eigen::Vector4d q = Eigen::Vector4d::Zero();
  double offset = 0.0;

  double cost(const Variances& sigma) const {
    return 0.5 * sigma.dot(a * sigma) - q.dot(sigma) + offset;
  }
};

NormalSystem build_system(const BinCovarianceSet& set, std::size_t bin);
NormalSystem build_system(const ComponentMatrices& comps,
                          const CMatrix& adjusted);

// Bit z set means component z is clamped to zero.
using ActiveMask = std::uint8_t;

struct ActiveSetState {
  ActiveMask active = 0;
  Variances sigma = Variances::Zero();
  Variances unconstrained = Variances::Zero();
  double cost = 0.0;
  double unconstrained_cost = 0.0;
  // Gradient of the cost on clamped entries, zero elsewhere.
  Variances zeta = Variances::Zero();
  int solves = 0;
  // Diagonal loading was needed to bring the condition number under 1e12.
  bool loaded = false;

  bool is_active(std::size_t z) const { return (active >> z) & 1u; }
  // mu^2 of the slack formulation: the value of each free entry.
  Variances slack() const;
};

inline constexpr double kMaxCondition = 1e12;

struct Conditioned {
  Eigen::Matrix4d a;
  bool loaded = false;
};

// Raises kDegenerateSystem naming the components when two of them are
// indistinguishable, and loads the diagonal by 1e-10 trace(A)/4 once when
// the condition number reaches 1e12.
Conditioned condition_system(const NormalSystem& sys);

Variances solve_unconstrained(const NormalSystem& sys);

// Exact minimiser of the cost over sigma >= 0. Clamp patterns are tried in
// growing cardinality over the negative entries of the unconstrained
// solution, lexicographic within a tier; the first pattern whose solution
// satisfies the optimality conditions is returned. Patterns outside that
// family are searched only when none inside it qualifies. At most 16
// linear solves.
ActiveSetState solve_nonnegative(const NormalSystem& sys);


nlohmann::json debug_json(std::size_t bin, const NormalSystem& sys,
                          const ActiveSetState& state);

}  // namespace ncmdoa

#endif  // NCMDOA_VARIANCE_SOLVER_HPP_
