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

#include "ncmdoa/beamformers.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "ncmdoa/covariance.hpp"
#include "ncmdoa/error.hpp"

namespace ncmdoa {

namespace {

// Cholesky factor of a Hermitian matrix; false if it is not positive
// definite.
bool factorise(const CMatrix& r, Eigen::LLT<CMatrix>& llt) {
  llt.compute(r);
  return llt.info() == Eigen::Success;
}

Eigen::LLT<CMatrix> factorise_or_throw(const CMatrix& r, const char* what) {
  Eigen::LLT<CMatrix> llt;
  if (!factorise(r, llt)) {
    fail(ErrorCode::kNumeric, std::string(what) + " is not positive definite");
  }
  return llt;
}

CVector lcmv_from_factor(const Eigen::LLT<CMatrix>& llt, const CMatrix& c) {
  const CMatrix x = llt.solve(c);
  CMatrix g = c.adjoint() * x;
  g = 0.5 * (g + g.adjoint()).eval();
  const CVector i = CVector::Unit(c.cols(), 0);
  const CVector coeff = g.fullPivLu().solve(i);
  return x * coeff;
}

CVector mvdr_from_factor(const Eigen::LLT<CMatrix>& llt, const CVector& d) {
  const CVector x = llt.solve(d);
  return x / d.dot(x);
}

void check_shapes(const BinMatrices& r, std::size_t bins, const char* what) {
  require(r.size() == bins,
          std::string(what) + " bin count does not match the constraints");
}

std::string collision_message(std::size_t k, double smin) {
  return "constraint matrix [d, b] is rank deficient at bin " +
         std::to_string(k) + " (smallest singular value " +
         std::to_string(smin) + "); interferer direction collides with the "
         "desired direction";
}

BeamformerWeights constrained(BeamformerMethod method, const BinMatrices& r,
                              const ConstraintSet& cs,
                              const BeamformerOptions& opts) {
  check_shapes(r, cs.bins(), "covariance");
  BeamformerWeights w;
  w.method = method;
  w.desired = cs.desired;
  w.interferer = cs.interferer;
  w.null_applied.assign(cs.bins(), true);
  w.loaded.assign(cs.bins(), false);
  w.h.reserve(cs.bins());
  for (std::size_t k = 0; k < cs.bins(); ++k) {
    Eigen::LLT<CMatrix> llt;
    if (!factorise(r[k], llt)) {
      if (method != BeamformerMethod::kLcmp) {
        fail(ErrorCode::kNumeric, "noise covariance at bin " +
                                      std::to_string(k) +
                                      " is not positive definite");
      }
      const auto m = r[k].rows();
      if (!factorise(r[k] + opts.epsilon * CMatrix::Identity(m, m), llt)) {
        fail(ErrorCode::kNumeric, "observed covariance at bin " +
                                      std::to_string(k) +
                                      " is not positive definite");
      }
      w.loaded[k] = true;
    }
    if (!cs.full_rank(k)) {
      if (opts.collision == CollisionPolicy::kThrow) {
        fail(ErrorCode::kConstraintCollision,
             collision_message(k, cs.smallest_singular_value(k)));
      }
      w.null_applied[k] = false;
      w.h.push_back(mvdr_from_factor(llt, cs.desired[k]));
      continue;
    }
    w.h.push_back(lcmv_from_factor(llt, cs.matrix(k)));
  }
  return w;
}

}  // namespace

std::string to_string(BeamformerMethod method) {
  switch (method) {
    case BeamformerMethod::kLcmv:
      return "lcmv";
    case BeamformerMethod::kMvdr:
      return "mvdr";
    case BeamformerMethod::kLcmp:
      return "lcmp";
  }
  return "mvdr";
}

CMatrix ConstraintSet::matrix(std::size_t k) const {
  CMatrix c(desired[k].size(), 2);
  c.col(0) = desired[k];
  c.col(1) = interferer[k];
  return c;
}

double ConstraintSet::smallest_singular_value(std::size_t k) const {
  Eigen::JacobiSVD<CMatrix> svd(matrix(k));
  return svd.singularValues().minCoeff();
}

bool ConstraintSet::full_rank(std::size_t k) const {
  const double m = static_cast<double>(desired[k].size());
  return smallest_singular_value(k) >= 1e-6 * std::sqrt(m);
}

CVector lcmv_weights(const CMatrix& r, const CMatrix& c) {
  require(c.cols() >= 1 && c.cols() <= c.rows() && c.rows() == r.rows(),
          "constraint matrix must be M x n with 1 <= n <= M");
  return lcmv_from_factor(factorise_or_throw(r, "covariance"), c);
}

CVector mvdr_weights(const CMatrix& r, const CVector& d, MvdrForm form) {
  require(d.size() == r.rows(), "steering vector length mismatch");
  if (form == MvdrForm::kPrinted) {
    const CVector x = r * d;
    return x / d.dot(x);
  }
  return mvdr_from_factor(factorise_or_throw(r, "covariance"), d);
}

BeamformerWeights lcmv(const BinMatrices& ncm, const ConstraintSet& cs,
                       const BeamformerOptions& opts) {
  return constrained(BeamformerMethod::kLcmv, ncm, cs, opts);
}

BeamformerWeights lcmp(const BinMatrices& ry, const ConstraintSet& cs,
                       const BeamformerOptions& opts) {
  return constrained(BeamformerMethod::kLcmp, ry, cs, opts);
}

BeamformerWeights mvdr(const BinMatrices& ncm, const BinVectors& d,
                       const BeamformerOptions& opts) {
  check_shapes(ncm, d.size(), "noise covariance");
  BeamformerWeights w;
  w.method = BeamformerMethod::kMvdr;
  w.desired = d;
  w.null_applied.assign(d.size(), false);
  w.loaded.assign(d.size(), false);
  for (std::size_t k = 0; k < d.size(); ++k) {
    w.h.push_back(mvdr_weights(ncm[k], d[k], opts.mvdr_form));
  }
  return w;
}

void export_weights(const std::filesystem::path& stem,
                    const BeamformerWeights& w) {
  BinMatrices cols;
  cols.reserve(w.h.size());
  for (const auto& h : w.h) cols.emplace_back(h);
  export_matrices(stem, cols, to_string(w.method) + " weights");
}

BinVectors import_weights(const std::filesystem::path& stem) {
  BinVectors out;
  for (const auto& m : import_matrices(stem)) {
    require(m.cols() == 1, "weights file holds non-vector entries");
    out.emplace_back(m.col(0));
  }
  return out;
}

}  // namespace ncmdoa
