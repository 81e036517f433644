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

#include <array>

#include "radseg/config.hpp"

RADSEG_NAMESPACE_BEGIN

namespace kernels {

// C[M x N] += A[M x K] * B[K x N], row-major with explicit leading dims.
// Every C element accumulates its K products in increasing k order, so the
// result is bitwise identical to a naive triple loop (the build disables
// floating-point contraction).
void gemm_acc(Index m, Index n, Index k, const Real* a, Index lda,
              const Real* b, Index ldb, Real* c, Index ldc);

// C[m x n] += A[m x k] * B[n x k]^T. Each dot product is split into
// interleaved partial sums, so the summation order differs from gemm_acc.
void gemm_nt_acc(Index m, Index n, Index k, const Real* a, Index lda,
                 const Real* b, Index ldb, Real* c, Index ldc);

// dst[cols x rows] = transpose(src[rows x cols]).
void transpose(Index rows, Index cols, const Real* src, Real* dst);

// Geometry of a (up to) 3-D convolution over one sample. 2-D convs use
// depth extent 1 with a depth kernel of 1.
struct ConvGeometry {
  Index channels = 1;
  std::array<Index, 3> in{1, 1, 1};
  std::array<Index, 3> out{1, 1, 1};
  std::array<Index, 3> kernel{1, 1, 1};
  std::array<Index, 3> stride{1, 1, 1};
  std::array<Index, 3> padding{0, 0, 0};
  std::array<Index, 3> dilation{1, 1, 1};

  Index kernel_volume() const { return kernel[0] * kernel[1] * kernel[2]; }
  Index in_volume() const { return in[0] * in[1] * in[2]; }
  Index out_volume() const { return out[0] * out[1] * out[2]; }
  Index col_rows() const { return channels * kernel_volume(); }
  // 1x1x1 kernel, unit stride, no padding: the column matrix is the input.
  bool is_pointwise() const;
};

// col[(c, kd, kh, kw), (od, oh, ow)] = x[c, od*s - p + kd*d, ...] or 0.
void im2col(const ConvGeometry& g, const Real* x, Real* col);
// Adjoint of im2col: x[...] += col[...]. Rows are visited in (c, kd, kh, kw)
// order and positions in (od, oh, ow) order.
void col2im(const ConvGeometry& g, const Real* col, Real* x);

}  // namespace kernels

RADSEG_NAMESPACE_END
