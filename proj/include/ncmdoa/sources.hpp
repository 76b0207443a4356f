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

#ifndef NCMDOA_SOURCES_HPP_
#define NCMDOA_SOURCES_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace ncmdoa {

enum class SourceKind { kSpeechLike, kHarmonic, kWav };

std::string to_string(SourceKind kind);
SourceKind parse_source_kind(const std::string& name);

// Formant and pitch presets for the speech-like generator.
enum class Voice { kLow = 0, kHigh = 1, kMusic = 2 };

struct SourceSpec {
  SourceKind kind = SourceKind::kSpeechLike;
  Voice voice = Voice::kLow;
  // Harmonic kind.
  double fundamental = 220.0;
  int harmonics = 16;
  // WAV kind: first channel, looped to length.
  std::string wav_path;

  static SourceSpec speech(Voice v) {
    SourceSpec s;
    s.voice = v;
    return s;
  }
};

// AR(12) resonator built from six formant pole pairs, driven by a jittered
// glottal pulse train mixed with noise and shaped by a 4 Hz syllabic
// envelope with random phase. Unit RMS.
std::vector<double> speech_like(std::size_t samples, double sampling_rate,
                                Voice voice, std::mt19937_64& rng);

// Sum of harmonics of `fundamental` with random phases, 1/h amplitudes.
// Raises kInvalidArgument if the top harmonic reaches Nyquist.
std::vector<double> harmonic_signal(std::size_t samples, double sampling_rate,
                                    double fundamental, int harmonics,
                                    std::mt19937_64& rng);

std::vector<double> make_source(const SourceSpec& spec, std::size_t samples,
                                double sampling_rate, std::mt19937_64& rng);

}  // namespace ncmdoa

#endif  // NCMDOA_SOURCES_HPP_
