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

#include "ncmdoa/stft.hpp"

#include <cmath>

#include "ncmdoa/error.hpp"
#include "ncmdoa/fft.hpp"

namespace ncmdoa {

std::vector<double> periodic_hamming(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(n));
  }
  return w;
}

StftConfig::StftConfig(std::size_t n) : frame_length(n) {
  require(n >= 2 && n % 2 == 0, "stft frame length must be even and >= 2");
  window_ = periodic_hamming(n);
}

std::size_t StftConfig::frame_count(std::size_t samples) const {
  if (samples < frame_length) return 0;
  return 1 + (samples - frame_length) / hop();
}

SpectralFrames::SpectralFrames(std::size_t sensors, std::size_t windows,
                               StftConfig cfg)
    : sensors_(sensors), windows_(windows), config_(std::move(cfg)) {
  per_bin_.assign(config_.bins(), CMatrix::Zero(sensors, windows));
}

SpectralFrames& SpectralFrames::operator+=(const SpectralFrames& other) {
  require(other.sensors_ == sensors_ && other.windows_ == windows_ &&
              other.config_ == config_,
          "spectral frame shapes differ");
  for (std::size_t k = 0; k < per_bin_.size(); ++k) {
    per_bin_[k] += other.per_bin_[k];
  }
  return *this;
}

SpectralFrames& SpectralFrames::operator*=(Complex scale) {
  for (auto& b : per_bin_) b *= scale;
  return *this;
}

SpectralFrames stft(const Multichannel& signals, const StftConfig& cfg) {
  require(!signals.empty(), "stft needs at least one channel");
  const std::size_t samples = signals.front().size();
  for (const auto& ch : signals) {
    require(ch.size() == samples, "stft channels differ in length");
  }
  require(samples >= cfg.frame_length, "signal shorter than one stft frame");

  const std::size_t n = cfg.frame_length;
  const std::size_t frames = cfg.frame_count(samples);
  SpectralFrames out(signals.size(), frames, cfg);
  RealFft& fft = cached_fft(n);
  std::vector<double> buf(n);
  std::vector<Complex> spec(cfg.bins());
  const auto& w = cfg.window();
  for (std::size_t m = 0; m < signals.size(); ++m) {
    for (std::size_t l = 0; l < frames; ++l) {
      const double* x = signals[m].data() + l * cfg.hop();
      for (std::size_t i = 0; i < n; ++i) buf[i] = w[i] * x[i];
      fft.forward(buf, spec);
      for (std::size_t k = 0; k < cfg.bins(); ++k) {
        out.at(m, l, k) = std::conj(spec[k]);
      }
    }
  }
  return out;
}

std::vector<double> istft(const SpectralFrames& frames) {
  require(frames.sensors() == 1, "istft expects a single-channel frame set");
  const StftConfig& cfg = frames.config();
  require(frames.bins() == cfg.bins(), "istft bin count does not match config");
  const std::size_t n = cfg.frame_length;
  const std::size_t hop = cfg.hop();
  const std::size_t count = frames.windows();
  if (count == 0) return {};
  std::vector<double> out((count - 1) * hop + n, 0.0);
  RealFft& fft = cached_fft(n);
  std::vector<Complex> spec(cfg.bins());
  std::vector<double> buf(n);
  const double scale = 1.0 / (static_cast<double>(n) * cfg.overlap_sum());
  for (std::size_t l = 0; l < count; ++l) {
    for (std::size_t k = 0; k < cfg.bins(); ++k) {
      spec[k] = std::conj(frames.at(0, l, k));
    }
    // A real signal has real DC and Nyquist bins.
    spec.front() = spec.front().real();
    spec.back() = spec.back().real();
    fft.inverse(spec, buf);
    double* y = out.data() + l * hop;
    for (std::size_t i = 0; i < n; ++i) y[i] += buf[i] * scale;
  }
  return out;
}

SpectralFrames apply_weights(const SpectralFrames& frames,
                             std::span<const CVector> weights) {
  require(weights.size() == frames.bins(),
          "beamformer weights must cover every bin");
  SpectralFrames out(1, frames.windows(), frames.config());
  for (std::size_t k = 0; k < frames.bins(); ++k) {
    require(static_cast<std::size_t>(weights[k].size()) == frames.sensors(),
            "beamformer weight length differs from sensor count");
    out.bin(k) = weights[k].adjoint() * frames.bin(k);
  }
  return out;
}

}  // namespace ncmdoa
