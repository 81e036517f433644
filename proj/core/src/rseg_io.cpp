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

#include "radseg/rseg_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

RADSEG_NAMESPACE_BEGIN

static_assert(std::endian::native == std::endian::little,
              "RSEG I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'S', 'E', 'G'};

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  void read(void* dst, std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw DataError("rseg: truncated " + std::string(what) + " in " + origin_);
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  template <typename T>
  T get(const char* what) {
    T v{};
    read(&v, sizeof(T), what);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::kF32: return 4;
    case DType::kF64: return 8;
    case DType::kU8: return 1;
  }
  throw DataError("rseg: unknown dtype " + std::to_string(static_cast<int>(t)));
}

std::string encode_rseg(DType dtype, const Shape& dims, const void* data) {
  if (dims.size() > kRsegMaxDims) throw DataError("rseg: too many dims");
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kRsegVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  out.append(3, '\0');
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (Index d : dims) {
    if (d < 0) throw DataError("rseg: negative extent");
    put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  }
  const auto bytes = static_cast<std::size_t>(numel(dims)) * dtype_size(dtype);
  if (bytes > 0) out.append(static_cast<const char*>(data), bytes);
  return out;
}

RsegArray decode_rseg(std::string_view bytes, const std::string& origin) {
  Reader in(bytes, origin);
  char magic[4];
  in.read(magic, 4, "header");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("rseg: bad magic in " + origin);
  }
  const auto version = in.get<std::uint32_t>("version");
  if (version != kRsegVersion) {
    throw DataError("rseg: unsupported version " + std::to_string(version) +
                    " in " + origin);
  }
  RsegArray out;
  const auto dtype = in.get<std::uint8_t>("dtype");
  if (dtype > 2) {
    throw DataError("rseg: unknown dtype " + std::to_string(dtype) + " in " + origin);
  }
  out.dtype = static_cast<DType>(dtype);
  char reserved[3];
  in.read(reserved, 3, "header");
  const auto ndims = in.get<std::uint32_t>("rank");
  if (ndims > kRsegMaxDims) {
    throw DataError("rseg: dim overflow (" + std::to_string(ndims) +
                    " dims) in " + origin);
  }
  const std::uint64_t limit =
      static_cast<std::uint64_t>(std::numeric_limits<Index>::max()) / 8;
  std::uint64_t total = 1;
  for (std::uint32_t i = 0; i < ndims; ++i) {
    const auto d = in.get<std::uint64_t>("dims");
    if (d > limit || (d != 0 && total > limit / d)) {
      throw DataError("rseg: dim overflow in " + origin);
    }
    total *= d;
    out.dims.push_back(static_cast<Index>(d));
  }
  const std::uint64_t n = total * dtype_size(out.dtype);
  if (n > in.remaining()) throw DataError("rseg: truncated payload in " + origin);
  out.payload.resize(static_cast<std::size_t>(n));
  if (n > 0) in.read(out.payload.data(), static_cast<std::size_t>(n), "payload");
  if (in.remaining() != 0) throw DataError("rseg: trailing bytes in " + origin);
  return out;
}

void write_rseg(const std::string& path, DType dtype, const Shape& dims,
                const void* data) {
  const std::string bytes = encode_rseg(dtype, dims, data);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("rseg: cannot open " + path + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("rseg: write failed for " + path);
}

RsegArray read_rseg(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("rseg: cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(is)),
                          std::istreambuf_iterator<char>());
  return decode_rseg(bytes, path);
}

std::vector<double> RsegArray::to_f64() const {
  const auto n = static_cast<std::size_t>(numel());
  std::vector<double> v(n);
  if (dtype == DType::kF64) {
    std::memcpy(v.data(), payload.data(), n * 8);
  } else if (dtype == DType::kF32) {
    std::vector<float> f(n);
    std::memcpy(f.data(), payload.data(), n * 4);
    for (std::size_t i = 0; i < n; ++i) v[i] = f[i];
  } else {
    throw DataError("rseg: expected a float payload, found u8");
  }
  return v;
}

std::vector<float> RsegArray::to_f32() const {
  const auto n = static_cast<std::size_t>(numel());
  if (dtype == DType::kF32) {
    std::vector<float> f(n);
    std::memcpy(f.data(), payload.data(), n * 4);
    return f;
  }
  const auto d = to_f64();
  return std::vector<float>(d.begin(), d.end());
}

std::vector<std::uint8_t> RsegArray::to_u8() const {
  if (dtype != DType::kU8) throw DataError("rseg: expected a u8 payload");
  return std::vector<std::uint8_t>(payload.begin(), payload.end());
}

void save_f32(const std::string& path, const Shape& dims, std::span<const float> v) {
  if (static_cast<Index>(v.size()) != numel(dims)) throw ShapeError("rseg: size mismatch");
  write_rseg(path, DType::kF32, dims, v.data());
}

void save_f64(const std::string& path, const Shape& dims, std::span<const double> v) {
  if (static_cast<Index>(v.size()) != numel(dims)) throw ShapeError("rseg: size mismatch");
  write_rseg(path, DType::kF64, dims, v.data());
}

void save_u8(const std::string& path, const Shape& dims,
             std::span<const std::uint8_t> v) {
  if (static_cast<Index>(v.size()) != numel(dims)) throw ShapeError("rseg: size mismatch");
  write_rseg(path, DType::kU8, dims, v.data());
}

void save_tensor(const std::string& path, const Tensor& t) {
  write_rseg(path, kDoublePrecision ? DType::kF64 : DType::kF32, t.shape(),
             t.data());
}

Tensor tensor_from_rseg(const RsegArray& a) {
#if defined(RADSEG_DOUBLE)
  return Tensor(a.dims, a.to_f64());
#else
  return Tensor(a.dims, a.to_f32());
#endif
}

Tensor load_tensor(const std::string& path) { return tensor_from_rseg(read_rseg(path)); }

RADSEG_NAMESPACE_END
