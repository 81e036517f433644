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

#include <vector>

#include "radseg/tensor.hpp"

RADSEG_NAMESPACE_BEGIN

inline constexpr Real kLogClamp = Real(1e-12);
inline constexpr Real kDiceSmoothing = Real(1e-6);

// Weighting factors of the combined objective.
struct LossWeights {
  Real wce = 1;
  Real sdice = 10;
  Real col = 5;
};

// Weighted cross entropy over probability maps p and one-hot targets y, both
// [B, K, M, N] (or [K, M, N]):
//   -(1/K) sum_k w_k sum_{m,n} y[k,m,n] log max(p[k,m,n], 1e-12)
// The inner sum over bins is not normalized. Batched inputs are averaged
// over the batch.
Tensor wce_loss(const Tensor& p, const Tensor& y,
                const std::vector<Real>& class_weights);

// Soft Dice, mean over classes (and batch) of
//   1 - (2 sum y p + s) / (sum y^2 + p^2 + s),  s = 1e-6.
Tensor soft_dice_loss(const Tensor& p, const Tensor& y);

// Coherence between RD [B, K, R, D] and RA [B, K, R, A] probability maps:
// max over Doppler and over angle give per-class range profiles; the loss is
// their mean squared difference over K x R (and batch). Lies in [0, 1].
Tensor coherence_loss(const Tensor& p_rd, const Tensor& p_ra);

struct LossBreakdown {
  Tensor total;
  double wce_rd = 0;
  double wce_ra = 0;
  double sdice_rd = 0;
  double sdice_ra = 0;
  double col = 0;
};

// w_wce (wCE_RD + wCE_RA) + w_sdice (SDice_RD + SDice_RA) + w_col CoL.
LossBreakdown combined_loss(const Tensor& p_rd, const Tensor& p_ra,
                            const Tensor& y_rd, const Tensor& y_ra,
                            const std::vector<Real>& class_weights,
                            const LossWeights& weights);

RADSEG_NAMESPACE_END
