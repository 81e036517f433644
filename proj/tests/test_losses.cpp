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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "radseg/gradcheck.hpp"
#include "radseg/losses.hpp"
#include "radseg/rng.hpp"
#include "oracles.hpp"

using namespace radseg;
using namespace radseg_test;

namespace {

constexpr double kTol = kDoublePrecision ? 1e-12 : 1e-4;

}  // namespace

TEST(LossOracle, AllThreeMatchLoopEvaluators) {
  const OracleReport r = check_losses(60, 1, kTol);
  EXPECT_TRUE(r.ok()) << r.first_failure << " max " << r.max_error;
}

TEST(LossOracle, UnbatchedInputsMatchBatchOfOne) {
  Rng rng(4);
  const Tensor p = random_probs(1, 3, 5, 5, rng), y = random_onehot(1, 3, 5, 5, rng);
  const Tensor p3(Shape{3, 5, 5}, std::vector<Real>(p.values().begin(), p.values().end()));
  const Tensor y3(Shape{3, 5, 5}, std::vector<Real>(y.values().begin(), y.values().end()));
  const std::vector<Real> w{0.2, 0.3, 0.5};
  EXPECT_EQ(wce_loss(p3, y3, w).item(), wce_loss(p, y, w).item());
  EXPECT_EQ(soft_dice_loss(p3, y3).item(), soft_dice_loss(p, y).item());
}

TEST(LossEdges, PerfectPredictionAndClamp) {
  Rng rng(5);
  const Tensor y = random_onehot(2, 3, 4, 4, rng);
  const std::vector<Real> w{0.2, 0.3, 0.5};
  EXPECT_EQ(wce_loss(y, y, w).item(), 0);
  EXPECT_NEAR(soft_dice_loss(y, y).item(), 0, 1e-12);

  // All mass on the wrong class: every bin pays -log(1e-12) at its weight.
  Tensor wrong({1, 2, 1, 3});
  Tensor truth({1, 2, 1, 3});
  for (Index i = 0; i < 3; ++i) {
    wrong.values()[3 + i] = 1;
    truth.values()[i] = 1;
  }
  const double expect = 0.7 * 3 * -std::log(1e-12) / 2;
  EXPECT_NEAR(wce_loss(wrong, truth, {0.7, 0.3}).item(), expect,
              (kDoublePrecision ? 1e-12 : 1e-6) * expect);
  EXPECT_TRUE(std::isfinite(wce_loss(wrong, truth, {0.7, 0.3}).item()));
  EXPECT_NEAR(soft_dice_loss(wrong, truth).item(), 1.0, 1e-6);
  EXPECT_THROW(wce_loss(wrong, truth, {1.0}), ShapeError);
  EXPECT_THROW(soft_dice_loss(wrong, Tensor({1, 2, 1, 4})), ShapeError);
}

TEST(LossEdges, CoherenceBounds) {
  Rng rng(6);
  const Tensor rd = random_probs(2, 3, 6, 4, rng);
  EXPECT_EQ(coherence_loss(rd, rd).item(), 0);
  Tensor a({1, 2, 4, 3}), b({1, 2, 4, 5});
  for (Index i = 0; i < 12; ++i) a.values()[i] = 1;
  for (Index i = 0; i < 20; ++i) b.values()[20 + i] = 1;
  EXPECT_EQ(coherence_loss(a, b).item(), 1);
  EXPECT_THROW(coherence_loss(a, Tensor({1, 2, 5, 5})), ShapeError);
}

TEST(LossProperties, CoherenceIgnoresDopplerAndAngleOrder) {
  Rng rng(7);
  const Tensor rd = random_probs(1, 3, 5, 4, rng), ra = random_probs(1, 3, 5, 6, rng);
  Tensor rd2 = rd.clone(), ra2 = ra.clone();
  for (Index c = 0; c < 3 * 5; ++c) {
    std::reverse(rd2.values().begin() + c * 4, rd2.values().begin() + (c + 1) * 4);
    std::rotate(ra2.values().begin() + c * 6, ra2.values().begin() + c * 6 + 2,
                ra2.values().begin() + (c + 1) * 6);
  }
  EXPECT_EQ(coherence_loss(rd, ra).item(), coherence_loss(rd2, ra2).item());
}

TEST(LossProperties, CombinedIsTheWeightedSum) {
  Rng rng(8);
  const Tensor prd = random_probs(2, 4, 8, 4, rng), pra = random_probs(2, 4, 8, 8, rng);
  const Tensor yrd = random_onehot(2, 4, 8, 4, rng), yra = random_onehot(2, 4, 8, 8, rng);
  const std::vector<Real> w{0.1, 0.3, 0.4, 0.2};
  const LossWeights lw{1, 10, 5};
  const LossBreakdown l = combined_loss(prd, pra, yrd, yra, w, lw);
  EXPECT_NEAR(l.wce_rd, wce_oracle(prd, yrd, w), kTol * 10);
  EXPECT_NEAR(l.sdice_ra, sdice_oracle(pra, yra), kTol);
  EXPECT_NEAR(l.col, col_oracle(prd, pra), kTol);
  const double sum = (l.wce_rd + l.wce_ra) + 10 * (l.sdice_rd + l.sdice_ra) + 5 * l.col;
  EXPECT_NEAR(l.total.item(), sum, kTol * 10 * std::abs(sum));

  // Linear in each weight.
  const LossBreakdown only_col = combined_loss(prd, pra, yrd, yra, w, {0, 0, 2});
  EXPECT_NEAR(only_col.total.item(), 2 * l.col, kTol);
  const LossBreakdown no_col = combined_loss(prd, pra, yrd, yra, w, {1, 10, 0});
  EXPECT_NEAR(l.total.item() - no_col.total.item(), 5 * l.col, kTol * 10 * std::abs(sum));
  EXPECT_EQ(no_col.col, l.col);
}

TEST(LossGradients, FiniteDifferencesAgree) {
  if (!kDoublePrecision) GTEST_SKIP() << "64-bit build only";
  Rng rng(9);
  const Tensor y = random_onehot(1, 3, 4, 5, rng);
  Tensor p = random_probs(1, 3, 4, 5, rng);
  Tensor q = random_probs(1, 3, 4, 6, rng);
  // Break ties in the max so the coherence gradient is defined.
  for (Index i = 0; i < q.numel(); ++i) q.values()[i] += Real(1e-3) * Real(i % 7);
  EXPECT_LT(grad_check([&](const Tensor& x) { return wce_loss(x, y, {0.2, 0.5, 0.3}); }, p)
                .max_rel_error,
            1e-6);
  EXPECT_LT(grad_check([&](const Tensor& x) { return soft_dice_loss(x, y); }, p).max_rel_error,
            1e-6);
  EXPECT_LT(grad_check([&](const Tensor& x) { return coherence_loss(p, x); }, q).max_rel_error,
            1e-6);
}
