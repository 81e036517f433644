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

#include "radseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "radseg/ops.hpp"

RADSEG_NAMESPACE_BEGIN

namespace {

struct MapDims {
  Index batch, classes, bins;
};

MapDims map_dims(const Tensor& p, const char* op) {
  if (p.ndim() == 3) return {1, p.dim(0), p.dim(1) * p.dim(2)};
  if (p.ndim() == 4) return {p.dim(0), p.dim(1), p.dim(2) * p.dim(3)};
  throw ShapeError(std::string(op) + ": expected [B, K, M, N] or [K, M, N], got " +
                   to_string(p.shape()));
}

void require_same(const Tensor& p, const Tensor& y, const char* op) {
  if (p.shape() != y.shape()) {
    throw ShapeError(std::string(op) + ": prediction " + to_string(p.shape()) +
                     " vs target " + to_string(y.shape()));
  }
}

void require_one_hot(const Tensor& y, const MapDims& d, const char* op) {
  const Real* yd = y.data();
  for (Index b = 0; b < d.batch; ++b) {
    for (Index j = 0; j < d.bins; ++j) {
      Real total = 0;
      for (Index k = 0; k < d.classes; ++k) {
        const Real v = yd[(b * d.classes + k) * d.bins + j];
        if (v != Real(0) && v != Real(1)) {
          throw DataError(std::string(op) + ": target is not one-hot");
        }
        total += v;
      }
      if (total != Real(1)) {
        throw DataError(std::string(op) + ": target is not one-hot");
      }
    }
  }
}

}  // namespace

Tensor wce_loss(const Tensor& p, const Tensor& y,
                const std::vector<Real>& class_weights) {
  require_same(p, y, "wce");
  const MapDims d = map_dims(p, "wce");
  if (static_cast<Index>(class_weights.size()) != d.classes) {
    throw ShapeError("wce: " + std::to_string(class_weights.size()) +
                     " class weights for " + std::to_string(d.classes) +
                     " classes");
  }
  if (any_meta({&p, &y})) return Tensor::meta(Shape{1});
  require_one_hot(y, d, "wce");

  const Real* pd = p.data();
  const Real* yd = y.data();
  const Real norm = Real(1) / static_cast<Real>(d.classes * d.batch);
  Real total = 0;
  for (Index b = 0; b < d.batch; ++b) {
    for (Index k = 0; k < d.classes; ++k) {
      const Index off = (b * d.classes + k) * d.bins;
      Real acc = 0;
      for (Index j = 0; j < d.bins; ++j) {
        if (yd[off + j] != Real(0)) {
          acc += yd[off + j] * std::log(std::max(pd[off + j], kLogClamp));
        }
      }
      total -= class_weights[k] * acc;
    }
  }
  total *= norm;

  auto pi = p.impl(), yi = y.impl();
  auto w = class_weights;
  return make_result(Shape{1}, {total}, {&p}, [pi, yi, w, d, norm](const TensorImpl& out) {
    const Real g = out.grad[0] * norm;
    for (Index b = 0; b < d.batch; ++b) {
      for (Index k = 0; k < d.classes; ++k) {
        const Index off = (b * d.classes + k) * d.bins;
        for (Index j = 0; j < d.bins; ++j) {
          const Real yv = yi->data[off + j];
          const Real pv = pi->data[off + j];
          if (yv != Real(0) && pv > kLogClamp) {
            pi->grad[off + j] -= g * w[k] * yv / pv;
          }
        }
      }
    }
  });
}

Tensor soft_dice_loss(const Tensor& p, const Tensor& y) {
  require_same(p, y, "soft_dice");
  const MapDims d = map_dims(p, "soft_dice");
  if (any_meta({&p, &y})) return Tensor::meta(Shape{1});

  const Real* pd = p.data();
  const Real* yd = y.data();
  const Index groups = d.batch * d.classes;
  auto inter = std::make_shared<std::vector<Real>>(groups);
  auto denom = std::make_shared<std::vector<Real>>(groups);
  Real total = 0;
  for (Index gidx = 0; gidx < groups; ++gidx) {
    const Index off = gidx * d.bins;
    Real i_acc = 0, u_acc = 0;
    for (Index j = 0; j < d.bins; ++j) {
      i_acc += yd[off + j] * pd[off + j];
      u_acc += yd[off + j] * yd[off + j] + pd[off + j] * pd[off + j];
    }
    (*inter)[gidx] = i_acc;
    (*denom)[gidx] = u_acc;
    total += Real(1) - (2 * i_acc + kDiceSmoothing) / (u_acc + kDiceSmoothing);
  }
  const Real norm = Real(1) / static_cast<Real>(groups);
  total *= norm;

  auto pi = p.impl(), yi = y.impl();
  return make_result(Shape{1}, {total}, {&p},
                     [pi, yi, inter, denom, d, norm, groups](const TensorImpl& out) {
                       const Real g = out.grad[0] * norm;
                       for (Index gidx = 0; gidx < groups; ++gidx) {
                         const Real num = 2 * (*inter)[gidx] + kDiceSmoothing;
                         const Real den = (*denom)[gidx] + kDiceSmoothing;
                         const Real inv = Real(1) / (den * den);
                         const Index off = gidx * d.bins;
                         for (Index j = 0; j < d.bins; ++j) {
                           const Real yv = yi->data[off + j];
                           const Real pv = pi->data[off + j];
                           // d/dp of -(num/den)
                           pi->grad[off + j] -=
                               g * (2 * yv * den - num * 2 * pv) * inv;
                         }
                       }
                     });
}

Tensor coherence_loss(const Tensor& p_rd, const Tensor& p_ra) {
  auto batched = [](const Tensor& t) {
    return t.ndim() == 3 ? Shape{1, t.dim(0), t.dim(1), t.dim(2)} : t.shape();
  };
  const Shape rd = batched(p_rd), ra = batched(p_ra);
  if (rd.size() != 4 || ra.size() != 4) {
    throw ShapeError("coherence: expected [B, K, R, *] maps");
  }
  if (rd[0] != ra[0] || rd[1] != ra[1]) {
    throw ShapeError("coherence: batch/class mismatch " + to_string(rd) +
                     " vs " + to_string(ra));
  }
  if (rd[2] != ra[2]) {
    throw ShapeError("coherence: range extent mismatch " +
                     std::to_string(rd[2]) + " vs " + std::to_string(ra[2]));
  }
  if (any_meta({&p_rd, &p_ra})) return Tensor::meta(Shape{1});

  const Index profiles = rd[0] * rd[1] * rd[2];
  const Index nd = rd[3], na = ra[3];
  auto arg_rd = std::make_shared<std::vector<Index>>(profiles);
  auto arg_ra = std::make_shared<std::vector<Index>>(profiles);
  auto diff = std::make_shared<std::vector<Real>>(profiles);
  auto row_max = [](const Real* row, Index n) {
    Index best = 0;
    for (Index j = 1; j < n; ++j) {
      if (row[j] > row[best]) best = j;
    }
    return best;
  };
  Real total = 0;
  for (Index i = 0; i < profiles; ++i) {
    const Index a = i * nd + row_max(p_rd.data() + i * nd, nd);
    const Index b = i * na + row_max(p_ra.data() + i * na, na);
    (*arg_rd)[i] = a;
    (*arg_ra)[i] = b;
    const Real dv = p_rd.data()[a] - p_ra.data()[b];
    (*diff)[i] = dv;
    total += dv * dv;
  }
  const Real norm = Real(1) / static_cast<Real>(profiles);
  total *= norm;

  auto rdi = p_rd.impl(), rai = p_ra.impl();
  return make_result(
      Shape{1}, {total}, {&p_rd, &p_ra},
      [rdi, rai, arg_rd, arg_ra, diff, norm, profiles](const TensorImpl& out) {
        const Real g = out.grad[0] * norm * 2;
        for (Index i = 0; i < profiles; ++i) {
          if (rdi->requires_grad) rdi->grad[(*arg_rd)[i]] += g * (*diff)[i];
          if (rai->requires_grad) rai->grad[(*arg_ra)[i]] -= g * (*diff)[i];
        }
      });
}

LossBreakdown combined_loss(const Tensor& p_rd, const Tensor& p_ra,
                            const Tensor& y_rd, const Tensor& y_ra,
                            const std::vector<Real>& class_weights,
                            const LossWeights& weights) {
  if (weights.wce < 0 || weights.sdice < 0 || weights.col < 0) {
    throw ConfigError("combined_loss: loss weights must be non-negative");
  }
  const Tensor wce_rd = wce_loss(p_rd, y_rd, class_weights);
  const Tensor wce_ra = wce_loss(p_ra, y_ra, class_weights);
  const Tensor dice_rd = soft_dice_loss(p_rd, y_rd);
  const Tensor dice_ra = soft_dice_loss(p_ra, y_ra);
  const Tensor col = coherence_loss(p_rd, p_ra);

  LossBreakdown out;
  out.total = add(add(scale(add(wce_rd, wce_ra), weights.wce),
                      scale(add(dice_rd, dice_ra), weights.sdice)),
                  scale(col, weights.col));
  if (!out.total.is_meta()) {
    out.wce_rd = wce_rd.item();
    out.wce_ra = wce_ra.item();
    out.sdice_rd = dice_rd.item();
    out.sdice_ra = dice_ra.item();
    out.col = col.item();
  }
  return out;
}

RADSEG_NAMESPACE_END
