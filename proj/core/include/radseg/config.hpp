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

#include <cstdint>
#include <stdexcept>
#include <string>

// The library is compiled once per floating-point build mode, each in its own
// inline namespace (f32 / f64).
#if defined(RADSEG_DOUBLE)
#define RADSEG_PRECISION_NS f64
#else
#define RADSEG_PRECISION_NS f32
#endif

#define RADSEG_NAMESPACE_BEGIN \
  namespace radseg {           \
  inline namespace RADSEG_PRECISION_NS {
#define RADSEG_NAMESPACE_END \
  }                          \
  }

RADSEG_NAMESPACE_BEGIN

#if defined(RADSEG_DOUBLE)
using Real = double;
#else
using Real = float;
#endif

using Index = std::int64_t;

inline constexpr bool kDoublePrecision = sizeof(Real) == 8;

// Error taxonomy shared by every module. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents that do not compose (wrong rank, channel mismatch, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid hyper-parameters or layer settings (non-positive output extent,
// non power-of-two FFT length, unknown config key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or inconsistent data on disk or in memory.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf during training or a failed numerical contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

RADSEG_NAMESPACE_END
