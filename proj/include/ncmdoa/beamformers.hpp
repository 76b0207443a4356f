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

#ifndef NCMDOA_BEAMFORMERS_HPP_
#define NCMDOA_BEAMFORMERS_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ncmdoa/types.hpp"

namespace ncmdoa {

enum class BeamformerMethod { kLcmv, kMvdr, kLcmp };

std::string to_string(BeamformerMethod method);

// What to do when the two constraint columns cannot be told apart.
enum class CollisionPolicy { kThrow, kFallbackToMvdr };

// kStandard: R^-1 d / (d^H R^-1 d). kPrinted: R d / (d^H R d), kept only so
// the alternative reading can be reproduced.
enum class MvdrForm { kStandard, kPrinted };

// Per-bin C = [d | b] with response (1, 0).
struct ConstraintSet {
  BinVectors desired;
  BinVectors interferer;

  std::size_t bins() const { return desired.size(); }
  CMatrix matrix(std::size_t k) const;
  // Smallest singular value of C at bin k.
  double smallest_singular_value(std::size_t k) const;
  // sigma_min(C) >= 1e-6 sqrt(M).
  bool full_rank(std::size_t k) const;
};

struct BeamformerWeights {
  BeamformerMethod method = BeamformerMethod::kMvdr;
  BinVectors h;
  BinVectors desired;
  BinVectors interferer;
  // False where the null constraint was dropped after a collision.
  std::vector<bool> null_applied;
  // LCMP bins whose covariance needed epsilon loading to factorise.
  std::vector<bool> loaded;
};

struct BeamformerOptions {
  CollisionPolicy collision = CollisionPolicy::kThrow;
  MvdrForm mvdr_form = MvdrForm::kStandard;
  // Loading added to R_y when it is not positive definite (LCMP only).
  double epsilon = 1e-4;
};

// h = R^-1 C (C^H R^-1 C)^-1 e_1 for one bin; C is usually [d | b].
CVector lcmv_weights(const CMatrix& r, const CMatrix& c);
// h = R^-1 d / (d^H R^-1 d) for one bin.
CVector mvdr_weights(const CMatrix& r, const CVector& d,
                     MvdrForm form = MvdrForm::kStandard);

BeamformerWeights lcmv(const BinMatrices& ncm, const ConstraintSet& cs,
                       const BeamformerOptions& opts = {});
BeamformerWeights mvdr(const BinMatrices& ncm, const BinVectors& d,
                       const BeamformerOptions& opts = {});
BeamformerWeights lcmp(const BinMatrices& ry, const ConstraintSet& cs,
                       const BeamformerOptions& opts = {});

// Same binary + JSON sidecar layout as covariance exports, one M x 1
// matrix per bin.
void export_weights(const std::filesystem::path& stem,
                    const BeamformerWeights& w);
BinVectors import_weights(const std::filesystem::path& stem);

}  // namespace ncmdoa

#endif  // NCMDOA_BEAMFORMERS_HPP_
