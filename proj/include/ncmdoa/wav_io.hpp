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

#ifndef NCMDOA_WAV_IO_HPP_
#define NCMDOA_WAV_IO_HPP_

#include <filesystem>

#include "ncmdoa/types.hpp"

namespace ncmdoa {

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

struct WavData {
  double sampling_rate = 0.0;
  Multichannel channels;
};

// Reads PCM 16/24-bit or 32-bit float RIFF files. Only 16 kHz material is
// accepted; anything else raises kInvalidArgument naming the rate.
WavData read_wav(const std::filesystem::path& path,
                 double required_rate = 16000.0);

void write_wav(const std::filesystem::path& path, const Multichannel& channels,
               double sampling_rate,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace ncmdoa

#endif  // NCMDOA_WAV_IO_HPP_
