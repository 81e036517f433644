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
#include <span>
#include <string>
#include <vector>

#include "radseg/radar.hpp"
#include "radseg/rng.hpp"
#include "radseg/tensor.hpp"

RADSEG_NAMESPACE_BEGIN

struct ViewStats {
  double min = 0;
  double max = 1;
  void validate(const std::string& view) const;
};

// Global min/max per view, taken over the train split only.
struct NormStats {
  ViewStats rd;
  ViewStats ra;
  ViewStats ad;
};

struct SequenceRecord {
  std::string split;  // train, val or test
  std::string name;   // seq_NNN
  Index frames = 0;
};

// On-disk layout:
//   root/meta.txt
//   root/<split>/seq_NNN/frame_TTTT.{rd,ra,ad,rdmask,ramask}.rseg
struct DatasetIndex {
  std::string root;
  std::string profile = "desk";
  Index n_range = 0;
  Index n_angle = 0;
  Index n_doppler = 0;
  int n_classes = kNumClasses;
  std::uint64_t seed = 0;
  std::vector<SequenceRecord> sequences;
  NormStats stats;
  std::vector<std::uint64_t> class_counts;  // RD + RA train mask bins

  std::vector<SequenceRecord> split(const std::string& name) const;
  std::string sequence_dir(const SequenceRecord& s) const;
  std::string frame_prefix(const SequenceRecord& s, Index t) const;

  void save() const;
  static DatasetIndex load(const std::string& root);
};

// w_k proportional to 1 / count_k, normalized to sum 1. Refuses (DataError)
// when a class never occurs.
std::vector<double> compute_class_weights(const std::vector<std::uint64_t>& counts);
std::vector<double> compute_class_weights(const DatasetIndex& index);

// (x - min) / (max - min), clamped to [0, 1].
std::vector<Real> normalize_view(std::span<const float> values, const ViewStats& s);
std::vector<double> denormalize_view(std::span<const Real> values, const ViewStats& s);

struct FrameData {
  std::vector<float> rd;   // n_range x n_doppler, dB
  std::vector<float> ra;   // n_range x n_angle, dB
  std::vector<float> ad;   // n_angle x n_doppler, dB
  std::vector<std::uint8_t> rd_mask;
  std::vector<std::uint8_t> ra_mask;
};

struct SequenceData {
  std::string name;
  std::vector<FrameData> frames;
};

struct SplitData {
  Index n_range = 0;
  Index n_angle = 0;
  Index n_doppler = 0;
  std::vector<SequenceData> sequences;
};

SplitData load_split(const DatasetIndex& index, const std::string& split);

// Past frames are stacked along the channel axis ([q+1, H, W]) for the 2D
// models and along a depth axis ([1, q+1, H, W]) for the temporal model.
enum class StackLayout { kChannels, kDepth };

struct Sample {
  Tensor rd_in;
  Tensor ra_in;
  Tensor ad_in;      // undefined unless requested
  Tensor rd_target;  // one-hot [K, n_range, n_doppler]
  Tensor ra_target;  // one-hot [K, n_range, n_angle]
};

struct SampleRef {
  std::size_t sequence = 0;
  Index t = 0;
};

// Every (sequence, t) with t >= q; earlier frames lack a full history.
std::vector<SampleRef> enumerate_samples(const SplitData& data, int q);

Sample stack_sample(const SequenceData& seq, Index t, int q, StackLayout layout,
                    const NormStats& stats, int n_classes, bool with_ad,
                    Index n_range, Index n_angle, Index n_doppler);
Sample stack_sample(const SplitData& data, const SampleRef& ref, int q,
                    StackLayout layout, const NormStats& stats, int n_classes,
                    bool with_ad);

Tensor one_hot(std::span<const std::uint8_t> labels, int n_classes, Index rows,
               Index cols);

struct FlipFlags {
  bool range = false;
  bool doppler = false;
  bool angle = false;
};

FlipFlags draw_flips(Rng& rng);

// Range flips RD, RA and both targets (AD has no range axis). Doppler flips
// RD, AD and the RD target. Angle flips RA, AD and the RA target.
Sample augment_flip(const Sample& s, const FlipFlags& flags);
Sample augment_flip(const Sample& s, Rng& rng);

// Stacks samples along a new leading batch axis.
struct Batch {
  Tensor rd_in;
  Tensor ra_in;
  Tensor ad_in;
  Tensor rd_target;
  Tensor ra_target;
  Index size = 0;
};

Batch collate(const std::vector<Sample>& samples);

struct SimulateOptions {
  Index frames = 200;
  Index frames_per_sequence = 20;
  double val_fraction = 0.2;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string profile = "desk";
};

// Simulates, writes and indexes a dataset. Coverage events (objects leaving
// the field of view) are appended to `events` when given.
DatasetIndex simulate_dataset(const std::string& root, const SimulateOptions& opt,
                              std::vector<std::string>* events = nullptr);

RADSEG_NAMESPACE_END
