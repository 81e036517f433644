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

#include "radseg/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

RADSEG_NAMESPACE_BEGIN

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_inplace(Complex* data, Index n, Index stride) {
  if (!is_power_of_two(n)) {
    throw ConfigError("fft: length " + std::to_string(n) +
                      " is not a power of two");
  }
  if (n == 1) return;
  auto at = [&](Index i) -> Complex& { return data[i * stride]; };

  for (Index i = 1, j = 0; i < n; ++i) {
    Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(at(i), at(j));
  }

  // Twiddles are evaluated directly per stage (not by recurrence) to keep the
  // error at O(log n) ulps.
  std::vector<Complex> twiddle(static_cast<std::size_t>(n / 2));
  for (Index k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    twiddle[k] = Complex(std::cos(angle), std::sin(angle));
  }
  for (Index len = 2; len <= n; len <<= 1) {
    const Index half = len / 2;
    const Index step = n / len;
    for (Index start = 0; start < n; start += len) {
      for (Index k = 0; k < half; ++k) {
        const Complex u = at(start + k);
        const Complex v = at(start + k + half) * twiddle[k * step];
        at(start + k) = u + v;
        at(start + k + half) = u - v;
      }
    }
  }
}

void fft_shift(Complex* data, Index n, Index stride) {
  const Index half = n / 2;
  if (n % 2 == 0) {
    for (Index i = 0; i < half; ++i) {
      std::swap(data[i * stride], data[(i + half) * stride]);
    }
    return;
  }
  std::vector<Complex> tmp(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) tmp[(i + half) % n] = data[i * stride];
  for (Index i = 0; i < n; ++i) data[i * stride] = tmp[i];
}

RADSEG_NAMESPACE_END
