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

#ifndef NCMDOA_STFT_HPP_
#define NCMDOA_STFT_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "ncmdoa/types.hpp"

namespace ncmdoa {

// Periodic Hamming analysis at 50% overlap. The periodic window sums to the
// constant 1.08 at that hop, which is what synthesis divides by.
struct StftConfig {
  std::size_t frame_length = 128;

  explicit StftConfig(std::size_t n = 128);

  std::size_t hop() const { return frame_length / 2; }
  std::size_t bins() const { return frame_length / 2 + 1; }
  const std::vector<double>& window() const { return window_; }
  double overlap_sum() const { return 1.08; }
  std::size_t frame_count(std::size_t samples) const;

  bool operator==(const StftConfig& other) const {
    return frame_length == other.frame_length;
  }

 private:
  std::vector<double> window_;
};

std::vector<double> periodic_hamming(std::size_t n);

// Complex tensor indexed [sensor][window][bin], stored per bin as a
// sensors x windows matrix so per-bin snapshots are contiguous columns.
class SpectralFrames {
 public:
  SpectralFrames() = default;
  SpectralFrames(std::size_t sensors, std::size_t windows, StftConfig cfg);

  std::size_t sensors() const { return sensors_; }
  std::size_t windows() const { return windows_; }
  std::size_t bins() const { return per_bin_.size(); }
  const StftConfig& config() const { return config_; }

  CMatrix& bin(std::size_t k) { return per_bin_[k]; }
  const CMatrix& bin(std::size_t k) const { return per_bin_[k]; }
  Complex& at(std::size_t m, std::size_t l, std::size_t k) {
    return per_bin_[k](m, l);
  }
  Complex at(std::size_t m, std::size_t l, std::size_t k) const {
    return per_bin_[k](m, l);
  }

  SpectralFrames& operator+=(const SpectralFrames& other);
  SpectralFrames& operator*=(Complex scale);

 private:
  std::size_t sensors_ = 0;
  std::size_t windows_ = 0;
  StftConfig config_;
  std::vector<CMatrix> per_bin_;
};

// Frame l covers samples [l*hop, l*hop + N). Bins use the e^{+j2pi kn/N}
// kernel, so a channel delayed by tau seconds picks up exp(+j2pi f tau) and a
// plane wave from a direction leading sensor m by u.(p_m - p_ref)/c seconds
// carries the steering entry exp(-j2pi f u.(p_m - p_ref)/c).
SpectralFrames stft(const Multichannel& signals, const StftConfig& cfg);

// Overlap-add synthesis of a single-channel frame set. The output holds
// (L-1)*hop + N samples; the first and last hop samples are only covered by
// one frame and are not exact.
std::vector<double> istft(const SpectralFrames& frames);

// out[l,k] = h[k]^H y[:,l,k].
SpectralFrames apply_weights(const SpectralFrames& frames,
                             std::span<const CVector> weights);

}  // namespace ncmdoa

#endif  // NCMDOA_STFT_HPP_
