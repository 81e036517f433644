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
#include <cmath>
#include <limits>
#include <memory>

#include "radseg/ops.hpp"

RADSEG_NAMESPACE_BEGIN

namespace {

// Product of extents after axis 1.
Index spatial_volume(const Shape& s) {
  Index n = 1;
  for (std::size_t i = 2; i < s.size(); ++i) n *= s[i];
  return n;
}

void require_rank_at_least(const Tensor& x, int rank, const char* op) {
  if (x.ndim() < rank) {
    throw ShapeError(std::string(op) + ": expected rank >= " +
                     std::to_string(rank) + ", got " + to_string(x.shape()));
  }
}

}  // namespace

Tensor maxpool2d(const Tensor& x, std::array<Index, 2> kernel,
                 std::array<Index, 2> stride) {
  if (x.ndim() != 4) {
    throw ShapeError("maxpool2d: expected [B, C, H, W], got " +
                     to_string(x.shape()));
  }
  const Index h = x.dim(2), w = x.dim(3);
  if (kernel[0] < 1 || kernel[1] < 1 || stride[0] < 1 || stride[1] < 1) {
    throw ConfigError("maxpool2d: kernel and stride must be >= 1");
  }
  if (kernel[0] > h || kernel[1] > w) {
    throw ConfigError("maxpool2d: window " + std::to_string(kernel[0]) + "x" +
                      std::to_string(kernel[1]) + " larger than input " +
                      std::to_string(h) + "x" + std::to_string(w));
  }
  const Index oh = (h - kernel[0]) / stride[0] + 1;
  const Index ow = (w - kernel[1]) / stride[1] + 1;
  const Index planes = x.dim(0) * x.dim(1);
  Shape out_shape{x.dim(0), x.dim(1), oh, ow};
  if (x.is_meta()) return Tensor::meta(out_shape);

  std::vector<Real> y(static_cast<std::size_t>(planes * oh * ow));
  auto argmax = std::make_shared<std::vector<Index>>(y.size());
  const Real* xd = x.data();
  for (Index p = 0; p < planes; ++p) {
    const Real* xp = xd + p * h * w;
    for (Index i = 0; i < oh; ++i) {
      for (Index j = 0; j < ow; ++j) {
        Index best = (i * stride[0]) * w + j * stride[1];
        Real best_v = xp[best];
        for (Index a = 0; a < kernel[0]; ++a) {
          for (Index b = 0; b < kernel[1]; ++b) {
            const Index idx = (i * stride[0] + a) * w + (j * stride[1] + b);
            // Strict comparison keeps the first maximum in row-major order.
            if (xp[idx] > best_v) {
              best_v = xp[idx];
              best = idx;
            }
          }
        }
        const Index o = (p * oh + i) * ow + j;
        y[o] = best_v;
        (*argmax)[o] = p * h * w + best;
      }
    }
  }
  auto xi = x.impl();
  return make_result(std::move(out_shape), std::move(y), {&x},
                     [xi, argmax](const TensorImpl& out) {
                       for (std::size_t o = 0; o < argmax->size(); ++o) {
                         xi->grad[(*argmax)[o]] += out.grad[o];
                       }
                     });
}

BatchNormParams BatchNormParams::make(Index channels) {
  BatchNormParams p;
  p.gamma = Tensor(Shape{channels}, Real(1));
  p.beta = Tensor(Shape{channels}, Real(0));
  p.running_mean = Tensor(Shape{channels}, Real(0));
  p.running_var = Tensor(Shape{channels}, Real(1));
  return p;
}

Tensor batch_norm(const Tensor& x, BatchNormParams& params, bool training) {
  require_rank_at_least(x, 2, "batch_norm");
  const Index batch = x.dim(0);
  const Index channels = x.dim(1);
  if (params.gamma.numel() != channels) {
    throw ShapeError("batch_norm: " + std::to_string(params.gamma.numel()) +
                     " scale entries for " + std::to_string(channels) +
                     " channels");
  }
  if (x.is_meta()) return Tensor::meta(x.shape());

  const Index s = spatial_volume(x.shape());
  const Index count = batch * s;
  const Real* xd = x.data();
  auto mean = std::make_shared<std::vector<Real>>(channels);
  auto inv_std = std::make_shared<std::vector<Real>>(channels);

  if (training) {
    for (Index c = 0; c < channels; ++c) {
      double acc = 0;
      for (Index b = 0; b < batch; ++b) {
        const Real* p = xd + (b * channels + c) * s;
        for (Index j = 0; j < s; ++j) acc += p[j];
      }
      const double m = acc / static_cast<double>(count);
      double var = 0;
      for (Index b = 0; b < batch; ++b) {
        const Real* p = xd + (b * channels + c) * s;
        for (Index j = 0; j < s; ++j) {
          const double d = p[j] - m;
          var += d * d;
        }
      }
      var /= static_cast<double>(count);
      (*mean)[c] = static_cast<Real>(m);
      (*inv_std)[c] = static_cast<Real>(1.0 / std::sqrt(var + params.eps));
      const double unbiased =
          count > 1 ? var * static_cast<double>(count) / (count - 1) : var;
      Real& rm = params.running_mean.data()[c];
      Real& rv = params.running_var.data()[c];
      rm = static_cast<Real>((1 - params.momentum) * rm + params.momentum * m);
      rv = static_cast<Real>((1 - params.momentum) * rv +
                             params.momentum * unbiased);
    }
  } else {
    for (Index c = 0; c < channels; ++c) {
      (*mean)[c] = params.running_mean.data()[c];
      (*inv_std)[c] = static_cast<Real>(
          1.0 / std::sqrt(static_cast<double>(params.running_var.data()[c]) +
                          params.eps));
    }
  }

  std::vector<Real> y(x.values().begin(), x.values().end());
  const Real* gamma = params.gamma.data();
  const Real* beta = params.beta.data();
  for (Index b = 0; b < batch; ++b) {
    for (Index c = 0; c < channels; ++c) {
      Real* p = y.data() + (b * channels + c) * s;
      const Real m = (*mean)[c], is = (*inv_std)[c], g = gamma[c], bt = beta[c];
      for (Index j = 0; j < s; ++j) p[j] = g * ((p[j] - m) * is) + bt;
    }
  }

  auto xi = x.impl();
  auto gi = params.gamma.impl();
  auto bi = params.beta.impl();
  BackwardFn backward = [xi, gi, bi, mean, inv_std, batch, channels, s, count,
                         training](const TensorImpl& out) {
    const Real* gy = out.grad.data();
    const Real* xd = xi->data.data();
    for (Index c = 0; c < channels; ++c) {
      const Real m = (*mean)[c], is = (*inv_std)[c];
      double sum_g = 0, sum_gx = 0;
      for (Index b = 0; b < batch; ++b) {
        const Index off = (b * channels + c) * s;
        for (Index j = 0; j < s; ++j) {
          sum_g += gy[off + j];
          sum_gx += gy[off + j] * ((xd[off + j] - m) * is);
        }
      }
      if (bi->requires_grad) bi->grad[c] += static_cast<Real>(sum_g);
      if (gi->requires_grad) gi->grad[c] += static_cast<Real>(sum_gx);
      if (!xi->requires_grad) continue;
      const Real g = gi->data[c];
      const Real mg = static_cast<Real>(sum_g / count);
      const Real mgx = static_cast<Real>(sum_gx / count);
      for (Index b = 0; b < batch; ++b) {
        const Index off = (b * channels + c) * s;
        for (Index j = 0; j < s; ++j) {
          if (training) {
            const Real xhat = (xd[off + j] - m) * is;
            xi->grad[off + j] += g * is * (gy[off + j] - mg - xhat * mgx);
          } else {
            xi->grad[off + j] += g * is * gy[off + j];
          }
        }
      }
    }
  };
  return make_result(x.shape(), std::move(y), {&x, &params.gamma, &params.beta},
                     std::move(backward));
}

Tensor leaky_relu(const Tensor& x, Real slope) {
  if (x.is_meta()) return Tensor::meta(x.shape());
  std::vector<Real> y(x.values().begin(), x.values().end());
  for (Real& v : y) v = v > 0 ? v : slope * v;
  auto xi = x.impl();
  return make_result(x.shape(), std::move(y), {&x},
                     [xi, slope](const TensorImpl& out) {
                       const auto& xd = xi->data;
                       for (std::size_t i = 0; i < xd.size(); ++i) {
                         xi->grad[i] += xd[i] > 0 ? out.grad[i]
                                                  : slope * out.grad[i];
                       }
                     });
}

Tensor softmax_channels(const Tensor& x) {
  require_rank_at_least(x, 2, "softmax_channels");
  if (x.is_meta()) return Tensor::meta(x.shape());
  const Index batch = x.dim(0), k = x.dim(1);
  const Index s = spatial_volume(x.shape());
  std::vector<Real> y(static_cast<std::size_t>(x.numel()));
  const Real* xd = x.data();
  for (Index b = 0; b < batch; ++b) {
    const Index base = b * k * s;
    for (Index j = 0; j < s; ++j) {
      Real mx = xd[base + j];
      for (Index c = 1; c < k; ++c) mx = std::max(mx, xd[base + c * s + j]);
      Real total = 0;
      for (Index c = 0; c < k; ++c) {
        const Real e = std::exp(xd[base + c * s + j] - mx);
        y[base + c * s + j] = e;
        total += e;
      }
      for (Index c = 0; c < k; ++c) y[base + c * s + j] /= total;
    }
  }
  auto xi = x.impl();
  auto probs = std::make_shared<std::vector<Real>>(y);
  return make_result(x.shape(), std::move(y), {&x},
                     [xi, probs, batch, k, s](const TensorImpl& out) {
                       const auto& p = *probs;
                       for (Index b = 0; b < batch; ++b) {
                         const Index base = b * k * s;
                         for (Index j = 0; j < s; ++j) {
                           Real dot = 0;
                           for (Index c = 0; c < k; ++c) {
                             const Index i = base + c * s + j;
                             dot += out.grad[i] * p[i];
                           }
                           for (Index c = 0; c < k; ++c) {
                             const Index i = base + c * s + j;
                             xi->grad[i] += p[i] * (out.grad[i] - dot);
                           }
                         }
                       }
                     });
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& ref = xs.front().shape();
  if (ref.size() < 2) throw ShapeError("concat_channels: inputs need rank >= 2");
  Index channels = 0;
  bool meta = false;
  for (const auto& t : xs) {
    const Shape& s = t.shape();
    bool same = s.size() == ref.size() && s[0] == ref[0];
    for (std::size_t a = 2; same && a < s.size(); ++a) same = s[a] == ref[a];
    if (!same) {
      throw ShapeError("concat_channels: extent mismatch " + to_string(ref) +
                       " vs " + to_string(s));
    }
    channels += s[1];
    meta = meta || t.is_meta();
  }
  Shape out_shape = ref;
  out_shape[1] = channels;
  if (meta) return Tensor::meta(out_shape);

  const Index batch = ref[0];
  const Index s = spatial_volume(ref);
  std::vector<Real> y(static_cast<std::size_t>(numel(out_shape)));
  std::vector<std::shared_ptr<TensorImpl>> parts;
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& t : xs) {
    const Index c = t.dim(1);
    for (Index b = 0; b < batch; ++b) {
      std::copy_n(t.data() + b * c * s, c * s,
                  y.data() + (b * channels + off) * s);
    }
    parts.push_back(t.impl());
    offsets.push_back(off);
    off += c;
  }
  auto result = Tensor(out_shape, std::move(y));
  const bool track = grad_enabled() &&
                     std::any_of(xs.begin(), xs.end(),
                                 [](const Tensor& t) { return t.requires_grad(); });
  if (track) {
    auto& impl = *result.impl();
    impl.parents = parts;
    impl.backward = [parts, offsets, batch, channels, s](const TensorImpl& out) {
      for (std::size_t i = 0; i < parts.size(); ++i) {
        auto& p = *parts[i];
        if (!p.requires_grad) continue;
        const Index c = p.shape[1];
        for (Index b = 0; b < batch; ++b) {
          const Real* src = out.grad.data() + (b * channels + offsets[i]) * s;
          Real* dst = p.grad.data() + b * c * s;
          for (Index j = 0; j < c * s; ++j) dst[j] += src[j];
        }
      }
    };
    result.set_requires_grad(true);
  }
  return result;
}

Tensor slice_channels(const Tensor& x, Index begin, Index count) {
  require_rank_at_least(x, 2, "slice_channels");
  if (begin < 0 || count < 1 || begin + count > x.dim(1)) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " +
                     std::to_string(x.dim(1)) + " channels");
  }
  Shape out_shape = x.shape();
  out_shape[1] = count;
  if (x.is_meta()) return Tensor::meta(out_shape);
  const Index batch = x.dim(0), channels = x.dim(1);
  const Index s = spatial_volume(x.shape());
  std::vector<Real> y(static_cast<std::size_t>(numel(out_shape)));
  for (Index b = 0; b < batch; ++b) {
    std::copy_n(x.data() + (b * channels + begin) * s, count * s,
                y.data() + b * count * s);
  }
  auto xi = x.impl();
  return make_result(std::move(out_shape), std::move(y), {&x},
                     [xi, batch, channels, begin, count, s](const TensorImpl& out) {
                       for (Index b = 0; b < batch; ++b) {
                         const Real* src = out.grad.data() + b * count * s;
                         Real* dst = xi->grad.data() + (b * channels + begin) * s;
                         for (Index j = 0; j < count * s; ++j) dst[j] += src[j];
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " +
                     to_string(shape));
  }
  if (x.is_meta()) return Tensor::meta(std::move(shape));
  std::vector<Real> y(x.values().begin(), x.values().end());
  auto xi = x.impl();
  return make_result(std::move(shape), std::move(y), {&x},
                     [xi](const TensorImpl& out) {
                       for (std::size_t i = 0; i < out.grad.size(); ++i) {
                         xi->grad[i] += out.grad[i];
                       }
                     });
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank_at_least(x, 3, "global_avg_pool");
  const Index batch = x.dim(0), channels = x.dim(1);
  Shape out_shape{batch, channels, 1, 1};
  if (x.is_meta()) return Tensor::meta(out_shape);
  const Index s = spatial_volume(x.shape());
  std::vector<Real> y(static_cast<std::size_t>(batch * channels));
  for (Index i = 0; i < batch * channels; ++i) {
    const Real* p = x.data() + i * s;
    Real acc = 0;
    for (Index j = 0; j < s; ++j) acc += p[j];
    y[i] = acc / static_cast<Real>(s);
  }
  auto xi = x.impl();
  return make_result(std::move(out_shape), std::move(y), {&x},
                     [xi, s](const TensorImpl& out) {
                       const Real inv = Real(1) / static_cast<Real>(s);
                       for (std::size_t i = 0; i < out.grad.size(); ++i) {
                         const Real g = out.grad[i] * inv;
                         Real* dst = xi->grad.data() + i * s;
                         for (Index j = 0; j < s; ++j) dst[j] += g;
                       }
                     });
}

Tensor broadcast_spatial(const Tensor& x, Index h, Index w) {
  if (x.ndim() != 4 || x.dim(2) != 1 || x.dim(3) != 1) {
    throw ShapeError("broadcast_spatial: expected [B, C, 1, 1], got " +
                     to_string(x.shape()));
  }
  Shape out_shape{x.dim(0), x.dim(1), h, w};
  if (x.is_meta()) return Tensor::meta(out_shape);
  const Index planes = x.dim(0) * x.dim(1);
  const Index s = h * w;
  std::vector<Real> y(static_cast<std::size_t>(planes * s));
  for (Index i = 0; i < planes; ++i) {
    std::fill(y.begin() + i * s, y.begin() + (i + 1) * s, x.data()[i]);
  }
  auto xi = x.impl();
  return make_result(std::move(out_shape), std::move(y), {&x},
                     [xi, planes, s](const TensorImpl& out) {
                       for (Index i = 0; i < planes; ++i) {
                         Real acc = 0;
                         for (Index j = 0; j < s; ++j) acc += out.grad[i * s + j];
                         xi->grad[i] += acc;
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  if (any_meta({&a, &b})) return Tensor::meta(a.shape());
  std::vector<Real> y(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.values()[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(y), {&a, &b},
                     [ai, bi](const TensorImpl& out) {
                       for (std::size_t i = 0; i < out.grad.size(); ++i) {
                         if (ai->requires_grad) ai->grad[i] += out.grad[i];
                         if (bi->requires_grad) bi->grad[i] += out.grad[i];
                       }
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mul: shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  if (any_meta({&a, &b})) return Tensor::meta(a.shape());
  std::vector<Real> y(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.values()[i];
  auto ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(y), {&a, &b},
                     [ai, bi](const TensorImpl& out) {
                       for (std::size_t i = 0; i < out.grad.size(); ++i) {
                         if (ai->requires_grad) ai->grad[i] += out.grad[i] * bi->data[i];
                         if (bi->requires_grad) bi->grad[i] += out.grad[i] * ai->data[i];
                       }
                     });
}

Tensor scale(const Tensor& a, Real factor) {
  if (a.is_meta()) return Tensor::meta(a.shape());
  std::vector<Real> y(a.values().begin(), a.values().end());
  for (Real& v : y) v *= factor;
  auto ai = a.impl();
  return make_result(a.shape(), std::move(y), {&a},
                     [ai, factor](const TensorImpl& out) {
                       for (std::size_t i = 0; i < out.grad.size(); ++i) {
                         ai->grad[i] += out.grad[i] * factor;
                       }
                     });
}

Tensor sum(const Tensor& x) {
  if (x.is_meta()) return Tensor::meta(Shape{1});
  Real acc = 0;
  for (Real v : x.values()) acc += v;
  auto xi = x.impl();
  return make_result(Shape{1}, {acc}, {&x}, [xi](const TensorImpl& out) {
    for (Real& g : xi->grad) g += out.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), Real(1) / static_cast<Real>(x.numel()));
}

Tensor flip(const Tensor& x, int axis) {
  const int n = x.ndim();
  if (axis < 0) axis += n;
  if (axis < 0 || axis >= n) throw ShapeError("flip: axis out of range");
  if (x.is_meta()) return Tensor::meta(x.shape());
  Index outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= x.dim(a);
  for (int a = axis + 1; a < n; ++a) inner *= x.dim(a);
  const Index len = x.dim(axis);
  auto index_of = [=](Index o, Index i, Index j) {
    return (o * len + i) * inner + j;
  };
  std::vector<Real> y(static_cast<std::size_t>(x.numel()));
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < len; ++i) {
      std::copy_n(x.data() + index_of(o, i, 0), inner,
                  y.data() + index_of(o, len - 1 - i, 0));
    }
  }
  auto xi = x.impl();
  return make_result(x.shape(), std::move(y), {&x},
                     [xi, outer, len, inner, index_of](const TensorImpl& out) {
                       for (Index o = 0; o < outer; ++o) {
                         for (Index i = 0; i < len; ++i) {
                           for (Index j = 0; j < inner; ++j) {
                             xi->grad[index_of(o, len - 1 - i, j)] +=
                                 out.grad[index_of(o, i, j)];
                           }
                         }
                       }
                     });
}

RADSEG_NAMESPACE_END
