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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radseg/tensor.hpp"

RADSEG_NAMESPACE_BEGIN

// RSEG container, little-endian:
//   "RSEG" | u32 version (1) | u8 dtype | u8 reserved[3] | u32 ndims |
//   u64 dims[ndims] | row-major payload
enum class DType : std::uint8_t { kF32 = 0, kF64 = 1, kU8 = 2 };

inline constexpr std::uint32_t kRsegVersion = 1;
inline constexpr std::uint32_t kRsegMaxDims = 16;

std::size_t dtype_size(DType t);

struct RsegArray {
  DType dtype = DType::kF32;
  Shape dims;
  std::vector<unsigned char> payload;

  Index numel() const { return radseg::numel(dims); }
  // Converts f32/f64 payloads to double; throws DataError for u8.
  std::vector<double> to_f64() const;
  std::vector<float> to_f32() const;
  std::vector<std::uint8_t> to_u8() const;
};

// In-memory encoding; decode rejects trailing bytes. `origin` names the
// source in error messages.
std::string encode_rseg(DType dtype, const Shape& dims, const void* data);
RsegArray decode_rseg(std::string_view bytes, const std::string& origin);

void write_rseg(const std::string& path, DType dtype, const Shape& dims,
                const void* data);
RsegArray read_rseg(const std::string& path);

void save_f32(const std::string& path, const Shape& dims, std::span<const float> v);
void save_f64(const std::string& path, const Shape& dims, std::span<const double> v);
void save_u8(const std::string& path, const Shape& dims,
             std::span<const std::uint8_t> v);

// Tensors are written in the build's native precision and loaded from either
// float payload.
void save_tensor(const std::string& path, const Tensor& t);
Tensor load_tensor(const std::string& path);
Tensor tensor_from_rseg(const RsegArray& a);

RADSEG_NAMESPACE_END
