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

#include "ncmdoa/sources.hpp"

#include <array>
#include <cmath>
#include <complex>

#include "ncmdoa/error.hpp"
#include "ncmdoa/types.hpp"
#include "ncmdoa/wav_io.hpp"

namespace ncmdoa {

namespace {

struct VoicePreset {
  std::array<double, 6> formants;
  std::array<double, 6> bandwidths;
  double pitch;
  double voiced_mix;
  bool syllabic;
};

const VoicePreset& preset(Voice v) {
  static const VoicePreset low{{730, 1090, 2440, 3400, 4500, 5500},
                               {90, 110, 160, 220, 300, 380},
                               120.0,
                               0.6,
                               true};
  static const VoicePreset high{{850, 1220, 2810, 3800, 4950, 6000},
                                {100, 120, 170, 240, 320, 400},
                                210.0,
                                0.6,
                                true};
  static const VoicePreset music{{330, 990, 1900, 2900, 4100, 5400},
                                 {150, 200, 260, 320, 400, 480},
                                 262.0,
                                 0.8,
                                 false};
  switch (v) {
    case Voice::kHigh:
      return high;
    case Voice::kMusic:
      return music;
    default:
      return low;
  }
}

void normalise(std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  if (acc <= 0.0) return;
  const double g = 1.0 / std::sqrt(acc / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

// Raised-cosine fade over the first and last `n` samples.
void fade(std::vector<double>& x, std::size_t n) {
  n = std::min(n, x.size() / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) /
                                          static_cast<double>(n));
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

}  // namespace

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kHarmonic:
      return "harmonic";
    case SourceKind::kWav:
      return "wav";
    default:
      return "speech";
  }
}

SourceKind parse_source_kind(const std::string& name) {
  if (name == "speech" || name == "speech-like") return SourceKind::kSpeechLike;
  if (name == "harmonic") return SourceKind::kHarmonic;
  if (name == "wav") return SourceKind::kWav;
  fail(ErrorCode::kConfig,
       "unknown source kind '" + name + "' (speech|harmonic|wav)");
}

std::vector<double> speech_like(std::size_t samples, double fs, Voice voice,
                                std::mt19937_64& rng) {
  const VoicePreset& p = preset(voice);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(0.95, 1.05);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  // Denominator of the all-pole filter from the conjugate pole pairs.
  std::array<double, 13> a{};
  a[0] = 1.0;
  int order = 0;
  for (std::size_t f = 0; f < p.formants.size(); ++f) {
    const double freq = p.formants[f] * jitter(rng);
    if (freq >= 0.45 * fs) continue;
    const double r = std::exp(-kPi * p.bandwidths[f] / fs);
    const double c1 = -2.0 * r * std::cos(2.0 * kPi * freq / fs);
    const double c2 = r * r;
    std::array<double, 13> next{};
    for (int i = 0; i <= order; ++i) {
      next[i] += a[i];
      next[i + 1] += c1 * a[i];
      next[i + 2] += c2 * a[i];
    }
    a = next;
    order += 2;
  }

  const double pitch = p.pitch * jitter(rng);
  const double env_phase = phase(rng);
  const double vib_phase = phase(rng);
  std::vector<double> out(samples, 0.0);
  std::array<double, 13> hist{};
  double glottal = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = static_cast<double>(n) / fs;
    // Slow pitch drift keeps the harmonics from being perfectly stationary.
    const double f_inst = pitch * (1.0 + 0.04 * std::sin(2.0 * kPi * 0.7 * t + vib_phase));
    glottal += f_inst / fs;
    double pulse = 0.0;
    if (glottal >= 1.0) {
      glottal -= 1.0;
      pulse = 1.0;
    }
    const double excitation =
        p.voiced_mix * pulse * std::sqrt(fs / pitch) +
        (1.0 - p.voiced_mix) * gauss(rng);
    double y = excitation;
    for (int i = 1; i <= order; ++i) y -= a[i] * hist[i - 1];
    for (int i = order - 1; i > 0; --i) hist[i] = hist[i - 1];
    hist[0] = y;
    double env = 1.0;
    if (p.syllabic) {
      const double s = 0.5 - 0.5 * std::cos(2.0 * kPi * 4.0 * t + env_phase);
      env = 0.08 + 0.92 * s * s;
    }
    out[n] = env * y;
  }
  // Remove the DC the pulse train leaves behind.
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(std::max<std::size_t>(samples, 1));
  for (double& v : out) v -= mean;
  fade(out, static_cast<std::size_t>(0.01 * fs));
  normalise(out);
  return out;
}

std::vector<double> harmonic_signal(std::size_t samples, double fs,
                                    double fundamental, int harmonics,
                                    std::mt19937_64& rng) {
  require(fundamental > 0.0 && harmonics >= 1,
          "harmonic source needs a positive fundamental and count");
  if (fundamental * harmonics >= fs / 2.0) {
    fail(ErrorCode::kInvalidArgument,
         "harmonic source content reaches " +
             std::to_string(fundamental * harmonics) +
             " Hz, at or above the Nyquist frequency");
  }
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<double> ph(static_cast<std::size_t>(harmonics));
  for (double& v : ph) v = phase(rng);
  std::vector<double> out(samples, 0.0);
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = static_cast<double>(n) / fs;
    double acc = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      acc += std::sin(2.0 * kPi * fundamental * h * t + ph[h - 1]) / h;
    }
    out[n] = acc;
  }
  fade(out, static_cast<std::size_t>(0.01 * fs));
  normalise(out);
  return out;
}

std::vector<double> make_source(const SourceSpec& spec, std::size_t samples,
                                double fs, std::mt19937_64& rng) {
  switch (spec.kind) {
    case SourceKind::kHarmonic:
      return harmonic_signal(samples, fs, spec.fundamental, spec.harmonics, rng);
    case SourceKind::kWav: {
      const WavData w = read_wav(spec.wav_path, fs);
      require(!w.channels.empty() && !w.channels[0].empty(),
              spec.wav_path + " holds no samples");
      std::vector<double> out(samples);
      const auto& ch = w.channels[0];
      for (std::size_t n = 0; n < samples; ++n) out[n] = ch[n % ch.size()];
      fade(out, static_cast<std::size_t>(0.01 * fs));
      normalise(out);
      return out;
    }
    default:
      return speech_like(samples, fs, spec.voice, rng);
  }
}

}  // namespace ncmdoa
