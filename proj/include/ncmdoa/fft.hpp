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

#ifndef NCMDOA_FFT_HPP_
#define NCMDOA_FFT_HPP_

#include <cstddef>
#include <span>

#include "ncmdoa/types.hpp"

namespace ncmdoa {

// Real-input DFT of fixed length backed by FFTW. forward() uses the
// e^{-j2pi kn/N} kernel, zero-pads short input and returns N/2+1 bins;
// inverse() is unnormalized.
// An instance owns scratch buffers and must not be shared between threads;
// use cached_fft() for a per-thread instance.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

RealFft& cached_fft(std::size_t n);

}  // namespace ncmdoa

#endif  // NCMDOA_FFT_HPP_
