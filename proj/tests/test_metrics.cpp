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
#include <sstream>

#include "radseg/metrics.hpp"
#include "radseg/rng.hpp"

using namespace radseg;

namespace {

std::vector<std::uint8_t> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(k)));
  return v;
}

}  // namespace

TEST(Metrics, WorkedExample) {
  // Predicted {0, 1}, truth {1, 2} for class 1 over four bins.
  ConfusionAccumulator acc(2);
  acc.add(std::vector<std::uint8_t>{1, 1, 0, 0}, std::vector<std::uint8_t>{0, 1, 1, 0});
  const auto s = iou_dice(acc);
  EXPECT_NEAR(s.iou[1], 100.0 / 3, 1e-12);
  EXPECT_NEAR(s.dice[1], 50.0, 1e-12);
  EXPECT_NEAR(precision(acc, 1), 50.0, 1e-12);
  EXPECT_NEAR(recall(acc, 1), 50.0, 1e-12);
}

TEST(Metrics, EmptyUnionScoresFullMarks) {
  ConfusionAccumulator acc(4);
  acc.add(std::vector<std::uint8_t>{0, 0, 3}, std::vector<std::uint8_t>{0, 0, 3});
  const auto s = iou_dice(acc);
  EXPECT_EQ(s.iou[1], 100);
  EXPECT_EQ(s.dice[2], 100);
  EXPECT_EQ(s.miou, 100);
  EXPECT_EQ(s.mdice, 100);
}

TEST(Metrics, DiceIdentitiesHoldOnRandomCounts) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionAccumulator acc(4);
    const std::size_t n = 1 + rng.below(300);
    acc.add(random_labels(n, 4, rng), random_labels(n, 4, rng));
    const auto s = iou_dice(acc);
    for (int k = 0; k < 4; ++k) {
      const double iou = s.iou[k] / 100, dice = s.dice[k] / 100;
      ASSERT_NEAR(dice, 2 * iou / (1 + iou), 1e-12);
      const double p = precision(acc, k) / 100, r = recall(acc, k) / 100;
      const double harmonic = p + r > 0 ? 2 * p * r / (p + r) : 0;
      ASSERT_NEAR(dice, harmonic, 1e-12) << "class " << k;
    }
  }
}

TEST(Metrics, CountsAreAdditiveOverFrames) {
  Rng rng(2);
  ConfusionAccumulator whole(3), parts(3);
  std::vector<std::uint8_t> pa, ta;
  for (int f = 0; f < 5; ++f) {
    const auto p = random_labels(40, 3, rng), t = random_labels(40, 3, rng);
    ConfusionAccumulator one(3);
    one.add(p, t);
    parts.merge(one);
    pa.insert(pa.end(), p.begin(), p.end());
    ta.insert(ta.end(), t.begin(), t.end());
  }
  whole.add(pa, ta);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(whole.intersection(k), parts.intersection(k));
    EXPECT_EQ(whole.predicted(k), parts.predicted(k));
    EXPECT_EQ(whole.truth(k), parts.truth(k));
  }
  EXPECT_THROW(whole.merge(ConfusionAccumulator(4)), ShapeError);
  EXPECT_THROW(whole.add(pa, std::vector<std::uint8_t>(3)), ShapeError);
}

TEST(Metrics, DecodeTakesArgmaxWithLowestIndexOnTies) {
  // [K=3, 1, 4]
  const Tensor p({3, 1, 4}, std::vector<Real>{0.5, 0.2, 0.4, 0.3,    //
                                              0.5, 0.7, 0.2, 0.3,    //
                                              0.0, 0.1, 0.4, 0.4});
  EXPECT_EQ(decode_hard(p), (std::vector<std::uint8_t>{0, 1, 0, 2}));
  const Tensor b({2, 1, 1, 1}, std::vector<Real>{0.4, 0.6});
  EXPECT_EQ(decode_hard(b), (std::vector<std::uint8_t>{0, 0}));
}

TEST(Metrics, CsvHasOneRowPerClassAndMean) {
  ConfusionAccumulator acc(4);
  acc.add(std::vector<std::uint8_t>{0, 1, 2, 3}, std::vector<std::uint8_t>{0, 1, 2, 2});
  std::ostringstream os;
  write_scores_csv(os, "rd", iou_dice(acc), true);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("view,class,iou,dice\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
  EXPECT_NE(text.find("rd,mean,"), std::string::npos);
}
