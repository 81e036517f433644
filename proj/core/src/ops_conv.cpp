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

#include <algorithm>
#include <memory>
#include <string>

#include "radseg/kernels.hpp"
#include "radseg/ops.hpp"

RADSEG_NAMESPACE_BEGIN

namespace {

std::vector<Index> fill_default(std::vector<Index> v, std::size_t rank,
                                Index value) {
  if (v.empty()) v.assign(rank, value);
  if (v.size() == 1 && rank > 1) v.assign(rank, v[0]);
  return v;
}

std::vector<Index> spatial_of(const Tensor& x) {
  return {x.shape().begin() + 2, x.shape().end()};
}

// Right-aligns up to three spatial extents into the fixed 3-axis geometry.
std::array<Index, 3> lift(const std::vector<Index>& v, Index fill) {
  std::array<Index, 3> out{fill, fill, fill};
  const std::size_t off = 3 - v.size();
  for (std::size_t i = 0; i < v.size(); ++i) out[off + i] = v[i];
  return out;
}

void validate_spec(const ConvSpec& s, int rank, bool transposed,
                   const char* op) {
  const std::string name(op);
  if (s.spatial_rank() != rank || s.stride.size() != s.kernel.size() ||
      s.padding.size() != s.kernel.size() ||
      s.dilation.size() != s.kernel.size()) {
    throw ConfigError(name + ": expected " + std::to_string(rank) +
                      " spatial axes in kernel/stride/padding/dilation");
  }
  for (int a = 0; a < rank; ++a) {
    if (s.kernel[a] < 1 || s.stride[a] < 1 || s.dilation[a] < 1 ||
        s.padding[a] < 0) {
      throw ConfigError(name + ": kernel, stride, dilation must be >= 1 and "
                               "padding >= 0");
    }
  }
  Shape expected = transposed ? Shape{s.in_channels, s.out_channels}
                              : Shape{s.out_channels, s.in_channels};
  expected.insert(expected.end(), s.kernel.begin(), s.kernel.end());
  if (!s.weights.defined() || s.weights.shape() != expected) {
    throw ShapeError(name + ": weights must have shape " + to_string(expected) +
                     (s.weights.defined() ? ", got " + to_string(s.weights.shape())
                                          : ", got none"));
  }
  if (s.bias.defined() && s.bias.shape() != Shape{s.out_channels}) {
    throw ShapeError(name + ": bias must have shape [" +
                     std::to_string(s.out_channels) + "]");
  }
}

void validate_input(const Tensor& x, const ConvSpec& s, int rank,
                    const char* op) {
  const std::string name(op);
  if (x.ndim() != rank + 2) {
    throw ShapeError(name + ": input must be rank " + std::to_string(rank + 2) +
                     " (batch, channels, spatial...), got " +
                     to_string(x.shape()));
  }
  if (x.dim(1) != s.in_channels) {
    throw ShapeError(name + ": input has " + std::to_string(x.dim(1)) +
                     " channels, conv expects " +
                     std::to_string(s.in_channels));
  }
}

Tensor conv_forward(const Tensor& x, const ConvSpec& spec, int rank,
                    const char* op) {
  validate_spec(spec, rank, false, op);
  validate_input(x, spec, rank, op);
  const auto out_sp = spec.output_extent(spatial_of(x));
  Shape out_shape{x.dim(0), spec.out_channels};
  out_shape.insert(out_shape.end(), out_sp.begin(), out_sp.end());
  if (any_meta({&x, &spec.weights, &spec.bias})) return Tensor::meta(out_shape);

  kernels::ConvGeometry g;
  g.channels = spec.in_channels;
  g.in = lift(spatial_of(x), 1);
  g.out = lift(out_sp, 1);
  g.kernel = lift(spec.kernel, 1);
  g.stride = lift(spec.stride, 1);
  g.padding = lift(spec.padding, 0);
  g.dilation = lift(spec.dilation, 1);

  const Index batch = x.dim(0);
  const Index co = spec.out_channels;
  const Index k = g.col_rows();
  const Index n = g.out_volume();
  const Index in_stride = spec.in_channels * g.in_volume();

  std::vector<Real> y(static_cast<std::size_t>(batch * co * n), Real(0));
  std::vector<Real> col;
  if (!g.is_pointwise()) col.resize(static_cast<std::size_t>(k * n));
  const Real* w = spec.weights.data();
  for (Index b = 0; b < batch; ++b) {
    Real* yb = y.data() + b * co * n;
    if (spec.bias.defined()) {
      for (Index c = 0; c < co; ++c) {
        std::fill(yb + c * n, yb + (c + 1) * n, spec.bias.data()[c]);
      }
    }
    const Real* xb = x.data() + b * in_stride;
    const Real* cols = xb;
    if (!g.is_pointwise()) {
      kernels::im2col(g, xb, col.data());
      cols = col.data();
    }
    kernels::gemm_acc(co, n, k, w, k, cols, n, yb, n);
  }

  auto xi = x.impl();
  auto wi = spec.weights.impl();
  auto bi = spec.bias.defined() ? spec.bias.impl() : nullptr;
  BackwardFn backward = [xi, wi, bi, g, batch, co, k, n,
                         in_stride](const TensorImpl& out) {
    const Real* gy = out.grad.data();
    if (bi && bi->requires_grad) {
      for (Index b = 0; b < batch; ++b) {
        for (Index c = 0; c < co; ++c) {
          const Real* row = gy + (b * co + c) * n;
          Real s = 0;
          for (Index j = 0; j < n; ++j) s += row[j];
          bi->grad[c] += s;
        }
      }
    }
    std::vector<Real> col;
    if (wi->requires_grad) {
      if (!g.is_pointwise()) col.resize(static_cast<std::size_t>(k * n));
      for (Index b = 0; b < batch; ++b) {
        const Real* xb = xi->data.data() + b * in_stride;
        const Real* cols = xb;
        if (!g.is_pointwise()) {
          kernels::im2col(g, xb, col.data());
          cols = col.data();
        }
        kernels::gemm_nt_acc(co, k, n, gy + b * co * n, n, cols, n,
                             wi->grad.data(), k);
      }
    }
    if (xi->requires_grad) {
      std::vector<Real> w_t(static_cast<std::size_t>(k * co));
      kernels::transpose(co, k, wi->data.data(), w_t.data());
      std::vector<Real> gcol;
      if (!g.is_pointwise()) gcol.resize(static_cast<std::size_t>(k * n));
      for (Index b = 0; b < batch; ++b) {
        Real* gxb = xi->grad.data() + b * in_stride;
        if (g.is_pointwise()) {
          kernels::gemm_acc(k, n, co, w_t.data(), co, gy + b * co * n, n, gxb,
                            n);
        } else {
          std::fill(gcol.begin(), gcol.end(), Real(0));
          kernels::gemm_acc(k, n, co, w_t.data(), co, gy + b * co * n, n,
                            gcol.data(), n);
          kernels::col2im(g, gcol.data(), gxb);
        }
      }
    }
  };
  return make_result(std::move(out_shape), std::move(y),
                     {&x, &spec.weights, &spec.bias}, std::move(backward));
}

}  // namespace

ConvSpec ConvSpec::make(Index in_channels, Index out_channels,
                        std::vector<Index> kernel, std::vector<Index> stride,
                        std::vector<Index> padding, std::vector<Index> dilation,
                        bool with_bias, bool transposed) {
  if (in_channels < 1 || out_channels < 1) {
    throw ConfigError("conv: channel counts must be positive");
  }
  ConvSpec s;
  const std::size_t rank = kernel.size();
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel = std::move(kernel);
  s.stride = fill_default(std::move(stride), rank, 1);
  s.padding = fill_default(std::move(padding), rank, 0);
  s.dilation = fill_default(std::move(dilation), rank, 1);
  Shape ws;
  ws.reserve(2 + rank);
  ws.push_back(transposed ? in_channels : out_channels);
  ws.push_back(transposed ? out_channels : in_channels);
  for (Index k : s.kernel) ws.push_back(k);
  s.weights = Tensor(ws);
  if (with_bias) s.bias = Tensor(Shape{out_channels});
  return s;
}

std::vector<Index> ConvSpec::output_extent(const std::vector<Index>& in) const {
  if (in.size() != kernel.size()) {
    throw ShapeError("conv: input spatial rank does not match kernel rank");
  }
  std::vector<Index> out(in.size());
  for (std::size_t a = 0; a < in.size(); ++a) {
    const Index span = in[a] + 2 * padding[a] - dilation[a] * (kernel[a] - 1) - 1;
    if (span < 0) {
      throw ConfigError("conv: non-positive output extent on axis " +
                        std::to_string(a) + " (input " + std::to_string(in[a]) +
                        ", kernel " + std::to_string(kernel[a]) + ", padding " +
                        std::to_string(padding[a]) + ", dilation " +
                        std::to_string(dilation[a]) + ")");
    }
    out[a] = span / stride[a] + 1;
  }
  return out;
}

std::vector<Index> ConvSpec::transposed_output_extent(
    const std::vector<Index>& in) const {
  if (in.size() != kernel.size()) {
    throw ShapeError("conv_transpose: input spatial rank does not match kernel");
  }
  std::vector<Index> out(in.size());
  for (std::size_t a = 0; a < in.size(); ++a) {
    out[a] = (in[a] - 1) * stride[a] - 2 * padding[a] +
             dilation[a] * (kernel[a] - 1) + 1;
    if (out[a] <= 0) {
      throw ConfigError("conv_transpose: non-positive output extent on axis " +
                        std::to_string(a));
    }
  }
  return out;
}

Index ConvSpec::parameter_count() const {
  Index n = weights.defined() ? weights.numel() : 0;
  if (bias.defined()) n += bias.numel();
  return n;
}

Tensor conv2d(const Tensor& x, const ConvSpec& spec) {
  return conv_forward(x, spec, 2, "conv2d");
}

Tensor conv3d(const Tensor& x, const ConvSpec& spec) {
  return conv_forward(x, spec, 3, "conv3d");
}

Tensor conv_transpose2d(const Tensor& x, const ConvSpec& spec) {
  constexpr const char* kOp = "conv_transpose2d";
  validate_spec(spec, 2, true, kOp);
  validate_input(x, spec, 2, kOp);
  const auto small = spatial_of(x);
  const auto big = spec.transposed_output_extent(small);
  Shape out_shape{x.dim(0), spec.out_channels, big[0], big[1]};
  if (any_meta({&x, &spec.weights, &spec.bias})) return Tensor::meta(out_shape);

  // A transposed conv is the adjoint of a regular conv whose input is the
  // (large) output here and whose output is x.
  kernels::ConvGeometry g;
  g.channels = spec.out_channels;
  g.in = lift(big, 1);
  g.out = lift(small, 1);
  g.kernel = lift(spec.kernel, 1);
  g.stride = lift(spec.stride, 1);
  g.padding = lift(spec.padding, 0);
  g.dilation = lift(spec.dilation, 1);

  const Index batch = x.dim(0);
  const Index ci = spec.in_channels;
  const Index co = spec.out_channels;
  const Index rows = g.col_rows();  // co * kernel volume
  const Index n = g.out_volume();   // input positions
  const Index out_vol = g.in_volume();

  std::vector<Real> w_t(static_cast<std::size_t>(rows * ci));
  kernels::transpose(ci, rows, spec.weights.data(), w_t.data());
  std::vector<Real> y(static_cast<std::size_t>(batch * co * out_vol), Real(0));
  std::vector<Real> col(static_cast<std::size_t>(rows * n));
  for (Index b = 0; b < batch; ++b) {
    std::fill(col.begin(), col.end(), Real(0));
    kernels::gemm_acc(rows, n, ci, w_t.data(), ci, x.data() + b * ci * n, n,
                      col.data(), n);
    Real* yb = y.data() + b * co * out_vol;
    kernels::col2im(g, col.data(), yb);
    if (spec.bias.defined()) {
      for (Index c = 0; c < co; ++c) {
        const Real bias = spec.bias.data()[c];
        Real* yc = yb + c * out_vol;
        for (Index j = 0; j < out_vol; ++j) yc[j] += bias;
      }
    }
  }

  auto xi = x.impl();
  auto wi = spec.weights.impl();
  auto bi = spec.bias.defined() ? spec.bias.impl() : nullptr;
  BackwardFn backward = [xi, wi, bi, g, batch, ci, co, rows, n,
                         out_vol](const TensorImpl& out) {
    const Real* gy = out.grad.data();
    if (bi && bi->requires_grad) {
      for (Index b = 0; b < batch; ++b) {
        for (Index c = 0; c < co; ++c) {
          const Real* row = gy + (b * co + c) * out_vol;
          Real s = 0;
          for (Index j = 0; j < out_vol; ++j) s += row[j];
          bi->grad[c] += s;
        }
      }
    }
    if (!xi->requires_grad && !wi->requires_grad) return;
    std::vector<Real> col(static_cast<std::size_t>(rows * n));
    for (Index b = 0; b < batch; ++b) {
      kernels::im2col(g, gy + b * co * out_vol, col.data());
      if (xi->requires_grad) {
        kernels::gemm_acc(ci, n, rows, wi->data.data(), rows, col.data(), n,
                          xi->grad.data() + b * ci * n, n);
      }
      if (wi->requires_grad) {
        kernels::gemm_nt_acc(ci, rows, n, xi->data.data() + b * ci * n, n,
                             col.data(), n, wi->grad.data(), rows);
      }
    }
  };
  return make_result(std::move(out_shape), std::move(y),
                     {&x, &spec.weights, &spec.bias}, std::move(backward));
}

RADSEG_NAMESPACE_END
