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

#include "radseg/metrics.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

RADSEG_NAMESPACE_BEGIN

const std::vector<std::string> kClassNames = {"background", "pedestrian",
                                              "cyclist", "car"};

std::vector<std::uint8_t> decode_hard(const Tensor& p) {
  Index batch, k, bins;
  if (p.ndim() == 3) {
    batch = 1;
    k = p.dim(0);
    bins = p.dim(1) * p.dim(2);
  } else if (p.ndim() == 4) {
    batch = p.dim(0);
    k = p.dim(1);
    bins = p.dim(2) * p.dim(3);
  } else {
    throw ShapeError("decode_hard: expected [B, K, M, N] or [K, M, N], got " +
                     to_string(p.shape()));
  }
  if (k > 255) throw ShapeError("decode_hard: more than 255 classes");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(batch * bins));
  const Real* d = p.data();
  for (Index b = 0; b < batch; ++b) {
    const Real* base = d + b * k * bins;
    for (Index j = 0; j < bins; ++j) {
      Index best = 0;
      for (Index c = 1; c < k; ++c) {
        if (base[c * bins + j] > base[best * bins + j]) best = c;
      }
      out[b * bins + j] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

ConfusionAccumulator::ConfusionAccumulator(int num_classes)
    : intersection_(num_classes, 0),
      predicted_(num_classes, 0),
      truth_(num_classes, 0) {
  if (num_classes < 1) throw ConfigError("metrics: need at least one class");
}

void ConfusionAccumulator::add(std::span<const std::uint8_t> predicted,
                               std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("metrics: prediction has " +
                     std::to_string(predicted.size()) + " bins, ground truth " +
                     std::to_string(truth.size()));
  }
  const auto k = static_cast<std::uint8_t>(num_classes());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::uint8_t a = predicted[i], b = truth[i];
    if (a >= k || b >= k) throw DataError("metrics: class index out of range");
    ++predicted_[a];
    ++truth_[b];
    if (a == b) ++intersection_[a];
  }
}

void ConfusionAccumulator::merge(const ConfusionAccumulator& other) {
  if (other.num_classes() != num_classes()) {
    throw ShapeError("metrics: cannot merge accumulators with different K");
  }
  for (int c = 0; c < num_classes(); ++c) {
    intersection_[c] += other.intersection_[c];
    predicted_[c] += other.predicted_[c];
    truth_[c] += other.truth_[c];
  }
}

SegmentationScores iou_dice(const ConfusionAccumulator& acc) {
  SegmentationScores s;
  const int k = acc.num_classes();
  for (int c = 0; c < k; ++c) {
    const double inter = static_cast<double>(acc.intersection(c));
    const double a = static_cast<double>(acc.predicted(c));
    const double b = static_cast<double>(acc.truth(c));
    const double uni = a + b - inter;
    s.iou.push_back(uni > 0 ? 100.0 * inter / uni : 100.0);
    s.dice.push_back(a + b > 0 ? 100.0 * 2 * inter / (a + b) : 100.0);
    s.miou += s.iou.back() / k;
    s.mdice += s.dice.back() / k;
  }
  return s;
}

double precision(const ConfusionAccumulator& acc, int k) {
  const auto a = acc.predicted(k);
  return a > 0 ? 100.0 * static_cast<double>(acc.intersection(k)) / a : 100.0;
}

double recall(const ConfusionAccumulator& acc, int k) {
  const auto b = acc.truth(k);
  return b > 0 ? 100.0 * static_cast<double>(acc.intersection(k)) / b : 100.0;
}

namespace {
std::string class_name(std::size_t k) {
  return k < kClassNames.size() ? kClassNames[k] : "class" + std::to_string(k);
}
}  // namespace

void write_scores_csv(std::ostream& os, const std::string& view,
                      const SegmentationScores& s, bool header) {
  if (header) os << "view,class,iou,dice\n";
  os << std::fixed << std::setprecision(4);
  for (std::size_t k = 0; k < s.iou.size(); ++k) {
    os << view << ',' << class_name(k) << ',' << s.iou[k] << ',' << s.dice[k]
       << '\n';
  }
  os << view << ",mean," << s.miou << ',' << s.mdice << '\n';
}

std::string format_scores_row(const std::string& view,
                              const SegmentationScores& s) {
  std::ostringstream os;
  os << std::left << std::setw(4) << view << std::right << std::fixed
     << std::setprecision(1);
  for (double v : s.iou) os << std::setw(7) << v;
  os << std::setw(8) << s.miou << "  |";
  for (double v : s.dice) os << std::setw(7) << v;
  os << std::setw(8) << s.mdice;
  return os.str();
}

RADSEG_NAMESPACE_END
