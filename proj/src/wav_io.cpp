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

#include "ncmdoa/wav_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "ncmdoa/error.hpp"

namespace ncmdoa {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wav io assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path, double required_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) -> void {
    fail(ErrorCode::kIo, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const auto size = read_le<std::uint32_t>(chunk + 4);
    if (pos + 8 + size > bytes.size()) bad("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) bad("short fmt chunk");
      format = read_le<std::uint16_t>(chunk + 8);
      channels = read_le<std::uint16_t>(chunk + 10);
      rate = read_le<std::uint32_t>(chunk + 12);
      bits = read_le<std::uint16_t>(chunk + 22);
      if (format == kFormatExtensible && size >= 26) {
        format = read_le<std::uint16_t>(chunk + 32);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }
  if (channels == 0 || data == nullptr) bad("missing fmt or data chunk");
  if (static_cast<double>(rate) != required_rate) {
    fail(ErrorCode::kInvalidArgument,
         path.string() + ": sampling rate " + std::to_string(rate) +
             " Hz is not supported (expected " +
             std::to_string(static_cast<long>(required_rate)) +
             " Hz; resample first)");
  }

  const std::size_t width = bits / 8;
  const bool pcm = format == kFormatPcm && (bits == 16 || bits == 24);
  const bool flt = format == kFormatFloat && bits == 32;
  if (!pcm && !flt) bad("unsupported encoding (need PCM16/24 or float32)");
  const std::size_t frames = data_size / (width * channels);

  WavData out;
  out.sampling_rate = rate;
  out.channels.assign(channels, std::vector<double>(frames));
  const std::uint8_t* p = data;
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c, p += width) {
      double v = 0.0;
      if (flt) {
        v = read_le<float>(p);
      } else if (bits == 16) {
        v = read_le<std::int16_t>(p) / 32768.0;
      } else {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      }
      out.channels[c][n] = v;
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const Multichannel& channels,
               double sampling_rate, WavEncoding encoding) {
  require(!channels.empty(), "write_wav needs at least one channel");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    require(ch.size() == frames, "write_wav channels differ in length");
  }
  const std::uint16_t bits = encoding == WavEncoding::kPcm16   ? 16
                             : encoding == WavEncoding::kPcm24 ? 24
                                                               : 32;
  const std::uint16_t width = bits / 8;
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const auto data_size = static_cast<std::uint32_t>(frames * nch * width);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le<std::uint32_t>(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(
      out, encoding == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm);
  put_le<std::uint16_t>(out, nch);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sampling_rate));
  put_le<std::uint32_t>(
      out, static_cast<std::uint32_t>(sampling_rate) * nch * width);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(nch * width));
  put_le<std::uint16_t>(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le<std::uint32_t>(out, data_size);

  for (std::size_t n = 0; n < frames; ++n) {
    for (const auto& ch : channels) {
      const double v = ch[n];
      switch (encoding) {
        case WavEncoding::kFloat32:
          put_le<float>(out, static_cast<float>(v));
          break;
        case WavEncoding::kPcm16:
          put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(
                                        std::clamp(v, -1.0, 32767.0 / 32768.0) *
                                        32768.0)));
          break;
        case WavEncoding::kPcm24: {
          const auto s = static_cast<std::int32_t>(std::lround(
              std::clamp(v, -1.0, 8388607.0 / 8388608.0) * 8388608.0));
          out.push_back(static_cast<std::uint8_t>(s & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 8) & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 16) & 0xFF));
          break;
        }
      }
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace ncmdoa
