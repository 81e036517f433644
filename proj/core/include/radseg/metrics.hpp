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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "radseg/tensor.hpp"

RADSEG_NAMESPACE_BEGIN

// Per-bin argmax over the class axis of [K, M, N] or [B, K, M, N]
// probabilities. Ties resolve to the lowest class index. Output is
// row-major over (B,) M, N.
std::vector<std::uint8_t> decode_hard(const Tensor& p);

// Per-class |A ∩ B|, |A| (predicted) and |B| (ground truth) counts,
// accumulated over every frame of a split.
class ConfusionAccumulator {
 public:
  explicit ConfusionAccumulator(int num_classes);

  void add(std::span<const std::uint8_t> predicted,
           std::span<const std::uint8_t> truth);
  void merge(const ConfusionAccumulator& other);

  int num_classes() const { return static_cast<int>(intersection_.size()); }
  std::uint64_t intersection(int k) const { return intersection_[k]; }
  std::uint64_t predicted(int k) const { return predicted_[k]; }
  std::uint64_t truth(int k) const { return truth_[k]; }

 private:
  std::vector<std::uint64_t> intersection_;
  std::vector<std::uint64_t> predicted_;
  std::vector<std::uint64_t> truth_;
};

// Scores in percent. Classes with an empty union score 100.
struct SegmentationScores {
  std::vector<double> iou;
  std::vector<double> dice;
  double miou = 0;
  double mdice = 0;
};

SegmentationScores iou_dice(const ConfusionAccumulator& acc);

// Precision/recall of class k in percent (100 when the denominator is 0).
double precision(const ConfusionAccumulator& acc, int k);
double recall(const ConfusionAccumulator& acc, int k);

extern const std::vector<std::string> kClassNames;

// CSV with header "view,class,iou,dice" and a "mean" row per view.
void write_scores_csv(std::ostream& os, const std::string& view,
                      const SegmentationScores& s, bool header);
// Plain-text row "VIEW  bkg ped cyc car mIoU | bkg ped cyc car mDice".
std::string format_scores_row(const std::string& view,
                              const SegmentationScores& s);

RADSEG_NAMESPACE_END
