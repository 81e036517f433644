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

#include "radseg/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <utility>
#include <vector>

RADSEG_NAMESPACE_BEGIN

namespace kernels {

namespace {

// 64-byte SIMD vectors (GCC/Clang vector extension), unaligned via memcpy.
using Vec = Real __attribute__((vector_size(64)));
constexpr Index kVecLanes = 64 / sizeof(Real);

inline Vec load(const Real* p) {
  Vec v;
  std::memcpy(&v, p, sizeof(Vec));
  return v;
}

inline void store(Real* p, Vec v) { std::memcpy(p, &v, sizeof(Vec)); }

constexpr Index kPanel = 3 * kVecLanes;

// c[4 x kPanel] += a[4 x k] * panel[k x kPanel] with the panel packed
// contiguously; every output accumulates over p in increasing order.
inline void tile4(Index k, const Real* a, Index lda, const Real* panel,
                  Real* c, Index ldc) {
  Vec t[4][3];
  for (int r = 0; r < 4; ++r) {
    for (int v = 0; v < 3; ++v) t[r][v] = load(c + r * ldc + v * kVecLanes);
  }
  const Real* bp = panel;
  for (Index p = 0; p < k; ++p, bp += kPanel) {
    const Vec b0 = load(bp), b1 = load(bp + kVecLanes),
              b2 = load(bp + 2 * kVecLanes);
    for (int r = 0; r < 4; ++r) {
      const Real ar = a[r * lda + p];
      t[r][0] += ar * b0;
      t[r][1] += ar * b1;
      t[r][2] += ar * b2;
    }
  }
  for (int r = 0; r < 4; ++r) {
    for (int v = 0; v < 3; ++v) store(c + r * ldc + v * kVecLanes, t[r][v]);
  }
}

inline void tile1(Index k, const Real* a, const Real* panel, Real* c) {
  Vec t[3];
  for (int v = 0; v < 3; ++v) t[v] = load(c + v * kVecLanes);
  const Real* bp = panel;
  for (Index p = 0; p < k; ++p, bp += kPanel) {
    const Real ar = a[p];
    t[0] += ar * load(bp);
    t[1] += ar * load(bp + kVecLanes);
    t[2] += ar * load(bp + 2 * kVecLanes);
  }
  for (int v = 0; v < 3; ++v) store(c + v * kVecLanes, t[v]);
}

// Plain loops for a column strip narrower than a panel.
inline void strip(Index m, Index n, Index k, const Real* a, Index lda,
                  const Real* b, Index ldb, Real* c, Index ldc) {
  for (Index i = 0; i < m; ++i) {
    Real* ci = c + i * ldc;
    for (Index p = 0; p < k; ++p) {
      const Real ap = a[i * lda + p];
      const Real* bp = b + p * ldb;
      for (Index j = 0; j < n; ++j) ci[j] += ap * bp[j];
    }
  }
}

constexpr Index kLanes = 16;

// 4 x 4 block of dot products over k, kLanes partial sums each.
inline void dot4x4(Index k, const Real* a, Index lda, const Real* b, Index ldb,
                   Real* c, Index ldc) {
  Real acc[4][4][kLanes] = {};
  Index p = 0;
  for (; p + kLanes <= k; p += kLanes) {
    for (int i = 0; i < 4; ++i) {
      const Real* ai = a + i * lda + p;
      for (int j = 0; j < 4; ++j) {
        const Real* bj = b + j * ldb + p;
        for (Index l = 0; l < kLanes; ++l) acc[i][j][l] += ai[l] * bj[l];
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Real s = 0;
      for (Index l = 0; l < kLanes; ++l) s += acc[i][j][l];
      for (Index q = p; q < k; ++q) s += a[i * lda + q] * b[j * ldb + q];
      c[i * ldc + j] += s;
    }
  }
}

inline Real dot1(Index k, const Real* a, const Real* b) {
  Real acc[kLanes] = {};
  Index p = 0;
  for (; p + kLanes <= k; p += kLanes) {
    for (Index l = 0; l < kLanes; ++l) acc[l] += a[p + l] * b[p + l];
  }
  Real s = 0;
  for (Index l = 0; l < kLanes; ++l) s += acc[l];
  for (; p < k; ++p) s += a[p] * b[p];
  return s;
}

}  // namespace

void gemm_nt_acc(Index m, Index n, Index k, const Real* a, Index lda,
                 const Real* b, Index ldb, Real* c, Index ldc) {
  // Reduction axis in chunks of kChunk.
  constexpr Index kChunk = 256;
  for (Index p0 = 0; p0 < k; p0 += kChunk) {
    const Index kc = std::min(kChunk, k - p0);
    const Real* ap = a + p0;
    const Real* bp = b + p0;
    Index i = 0;
    for (; i + 4 <= m; i += 4) {
      Index j = 0;
      for (; j + 4 <= n; j += 4) {
        dot4x4(kc, ap + i * lda, lda, bp + j * ldb, ldb, c + i * ldc + j, ldc);
      }
      for (; j < n; ++j) {
        for (Index r = i; r < i + 4; ++r) {
          c[r * ldc + j] += dot1(kc, ap + r * lda, bp + j * ldb);
        }
      }
    }
    for (; i < m; ++i) {
      for (Index j = 0; j < n; ++j) {
        c[i * ldc + j] += dot1(kc, ap + i * lda, bp + j * ldb);
      }
    }
  }
}

void gemm_acc(Index m, Index n, Index k, const Real* a, Index lda,
              const Real* b, Index ldb, Real* c, Index ldc) {
  std::vector<Real> panel(static_cast<std::size_t>(k * kPanel));
  Index j0 = 0;
  for (; j0 + kPanel <= n; j0 += kPanel) {
    for (Index p = 0; p < k; ++p) {
      std::memcpy(panel.data() + p * kPanel, b + p * ldb + j0,
                  sizeof(Real) * kPanel);
    }
    Index i = 0;
    for (; i + 4 <= m; i += 4) {
      tile4(k, a + i * lda, lda, panel.data(), c + i * ldc + j0, ldc);
    }
    for (; i < m; ++i) tile1(k, a + i * lda, panel.data(), c + i * ldc + j0);
  }
  if (j0 < n) strip(m, n - j0, k, a, lda, b + j0, ldb, c + j0, ldc);
}

void transpose(Index rows, Index cols, const Real* src, Real* dst) {
  constexpr Index kTile = 32;
  for (Index i0 = 0; i0 < rows; i0 += kTile) {
    const Index i1 = std::min(rows, i0 + kTile);
    for (Index j0 = 0; j0 < cols; j0 += kTile) {
      const Index j1 = std::min(cols, j0 + kTile);
      for (Index i = i0; i < i1; ++i) {
        for (Index j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
      }
    }
  }
}

bool ConvGeometry::is_pointwise() const {
  for (int a = 0; a < 3; ++a) {
    if (kernel[a] != 1 || stride[a] != 1 || padding[a] != 0) return false;
  }
  return true;
}

namespace {

// Output positions w in [lo, hi) whose input index w * stride + off lies in
// [0, in).
std::pair<Index, Index> valid_range(Index out, Index in, Index stride, Index off) {
  Index lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  Index hi = in - 1 - off < 0 ? 0 : (in - 1 - off) / stride + 1;
  lo = std::min(lo, out);
  hi = std::clamp(hi, lo, out);
  return {lo, hi};
}

}  // namespace

void im2col(const ConvGeometry& g, const Real* x, Real* col) {
  const Index od = g.out[0], oh = g.out[1], ow = g.out[2];
  const Index id = g.in[0], ih = g.in[1], iw = g.in[2];
  const Index plane = oh * ow;
  Real* dst = col;
  for (Index c = 0; c < g.channels; ++c) {
    const Real* xc = x + c * g.in_volume();
    for (Index kd = 0; kd < g.kernel[0]; ++kd) {
      for (Index kh = 0; kh < g.kernel[1]; ++kh) {
        for (Index kw = 0; kw < g.kernel[2]; ++kw) {
          for (Index d = 0; d < od; ++d) {
            const Index zd = d * g.stride[0] - g.padding[0] + kd * g.dilation[0];
            if (zd < 0 || zd >= id) {
              std::fill(dst, dst + plane, Real(0));
              dst += plane;
              continue;
            }
            for (Index h = 0; h < oh; ++h) {
              const Index zh =
                  h * g.stride[1] - g.padding[1] + kh * g.dilation[1];
              if (zh < 0 || zh >= ih) {
                std::fill(dst, dst + ow, Real(0));
                dst += ow;
                continue;
              }
              const Real* row = xc + (zd * ih + zh) * iw;
              const Index off = kw * g.dilation[2] - g.padding[2];
              const auto [lo, hi] = valid_range(ow, iw, g.stride[2], off);
              std::fill(dst, dst + lo, Real(0));
              if (g.stride[2] == 1) {
                std::copy(row + lo + off, row + hi + off, dst + lo);
              } else {
                for (Index w = lo; w < hi; ++w) dst[w] = row[w * g.stride[2] + off];
              }
              std::fill(dst + hi, dst + ow, Real(0));
              dst += ow;
            }
          }
        }
      }
    }
  }
}

void col2im(const ConvGeometry& g, const Real* col, Real* x) {
  const Index od = g.out[0], oh = g.out[1], ow = g.out[2];
  const Index id = g.in[0], ih = g.in[1], iw = g.in[2];
  const Index plane = oh * ow;
  const Real* src = col;
  for (Index c = 0; c < g.channels; ++c) {
    Real* xc = x + c * g.in_volume();
    for (Index kd = 0; kd < g.kernel[0]; ++kd) {
      for (Index kh = 0; kh < g.kernel[1]; ++kh) {
        for (Index kw = 0; kw < g.kernel[2]; ++kw) {
          for (Index d = 0; d < od; ++d) {
            const Index zd = d * g.stride[0] - g.padding[0] + kd * g.dilation[0];
            if (zd < 0 || zd >= id) {
              src += plane;
              continue;
            }
            for (Index h = 0; h < oh; ++h) {
              const Index zh =
                  h * g.stride[1] - g.padding[1] + kh * g.dilation[1];
              if (zh >= 0 && zh < ih) {
                Real* row = xc + (zd * ih + zh) * iw;
                const Index off = kw * g.dilation[2] - g.padding[2];
                const auto [lo, hi] = valid_range(ow, iw, g.stride[2], off);
                if (g.stride[2] == 1) {
                  Real* __restrict r = row + off;
                  const Real* __restrict q = src;
                  for (Index w = lo; w < hi; ++w) r[w] += q[w];
                } else {
                  for (Index w = lo; w < hi; ++w) row[w * g.stride[2] + off] += src[w];
                }
              }
              src += ow;
            }
          }
        }
      }
    }
  }
}

}  // namespace kernels

RADSEG_NAMESPACE_END
