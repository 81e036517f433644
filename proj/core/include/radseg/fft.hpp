// Copyright 2026 The radseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <span>

#include "radseg/config.hpp"

RADSEG_NAMESPACE_BEGIN

using Complex = std::complex<double>;

bool is_power_of_two(Index n);

// In-place iterative radix-2 forward DFT, X[k] = sum_n x[n] e^{-2 pi i k n / N},
// over `n` elements spaced `stride` apart. Throws ConfigError unless n is a
// power of two.
void fft_inplace(Complex* data, Index n, Index stride = 1);
inline void fft_inplace(std::span<Complex> data) {
  fft_inplace(data.data(), static_cast<Index>(data.size()), 1);
}

// Rotates by n/2 so the zero-frequency bin lands at index n/2.
void fft_shift(Complex* data, Index n, Index stride = 1);

RADSEG_NAMESPACE_END
