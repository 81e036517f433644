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
#include <string>
#include <vector>

#include "radseg/dataset.hpp"
#include "radseg/keyvalue.hpp"
#include "radseg/losses.hpp"
#include "radseg/metrics.hpp"
#include "radseg/models.hpp"

RADSEG_NAMESPACE_BEGIN

struct TrainConfig {
  Variant variant = Variant::kTmvaNet;
  int q = -1;  // -1: model default
  double width = 0.25;
  Index batch_size = 4;
  Index epochs = 300;
  double lr = 1e-4;
  double lr_decay_gamma = 0.9;
  Index lr_decay_every = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_wce = 1;
  double weight_sdice = 10;
  double weight_col = 5;
  std::uint64_t seed = 0;
  Index checkpoint_every = 1;
  bool augment = true;
  // Stop once train mIoU reaches this on both views (0 disables). Train
  // mIoU is measured every `train_eval_every` epochs.
  double target_train_miou = 0;
  Index train_eval_every = 5;

  void validate() const;
  // Learning rate in effect during (0-based) `epoch`.
  double lr_at(Index epoch) const;

  KeyValues to_key_values() const;
  // Unknown keys raise ConfigError; absent keys keep their defaults.
  static TrainConfig from_key_values(const KeyValues& kv);
  static TrainConfig load(const std::string& path);
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<Real>> m;
  std::vector<std::vector<Real>> v;
};

// One bias-corrected Adam update over `params`, reading each tensor's grad
// (absent grads count as zero). Moments are created on the first call.
void adam_step(const std::vector<Tensor>& params, AdamState& state, double lr);

struct EvalReport {
  SegmentationScores rd;
  SegmentationScores ra;
  ConfusionAccumulator rd_counts{kNumClasses};
  ConfusionAccumulator ra_counts{kNumClasses};
  double coherence = 0;  // mean coherence loss of the predictions
  Index samples = 0;

  double score() const { return 0.5 * (rd.miou + ra.miou); }
};

// Eval-mode pass (running BN statistics, no augmentation, no graph). When
// `export_dir` is non-empty the hard RD and RA masks of every sample are
// written there as <sequence>/frame_TTTT.{rd,ra}.png.
EvalReport evaluate(Model& model, const SplitData& data, const NormStats& stats,
                    Index batch_size, const std::string& export_dir = "");

struct EpochLog {
  Index epoch = 0;
  double lr = 0;
  double loss = 0;
  double wce_rd = 0;
  double wce_ra = 0;
  double sdice_rd = 0;
  double sdice_ra = 0;
  double col = 0;
  bool has_val = false;
  EvalReport val;
  bool has_train_eval = false;
  EvalReport train_eval;
  double seconds = 0;
};

// Everything needed to resume training or evaluate. Stored as one file:
//   "RCKP" | u32 version | u64 n | n bytes of key=value text |
//   u32 count | count x (u32 len | name | u64 len | RSEG blob)
struct Checkpoint {
  TrainConfig train;
  ModelConfig model;
  NormStats stats;
  std::vector<double> class_weights;
  Index epoch = 0;  // completed epochs
  std::string rng_state;
  double best_score = -1;
  Index best_epoch = -1;
  std::int64_t adam_step = 0;
  std::vector<NamedTensor> tensors;  // param.*, buffer.*, adam.m.*, adam.v.*
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
// Builds the model and copies parameters and BN buffers in.
Model restore_model(const Checkpoint& ckpt);

class Trainer {
 public:
  // Writes last.ckpt, best.ckpt (when a val split exists) and train_log.csv
  // into `out_dir`. `log` receives one line per epoch.
  Trainer(TrainConfig config, const DatasetIndex& data, std::string out_dir,
          std::ostream* log = nullptr);
  static Trainer resume(const std::string& checkpoint, const DatasetIndex& data,
                        std::string out_dir, std::ostream* log = nullptr);

  Trainer(Trainer&&) noexcept;
  ~Trainer();

  // Runs epochs until `config.epochs` (or `stop_after` completed epochs when
  // non-negative) or the train mIoU target is met.
  std::vector<EpochLog> run(Index stop_after = -1);

  Model& model() { return model_; }
  const TrainConfig& config() const { return config_; }
  Index epoch() const { return epoch_; }
  bool target_reached() const { return target_reached_; }
  // Loss breakdown of the first optimization step of this trainer.
  const LossBreakdown& first_step() const { return first_step_; }

  Checkpoint snapshot() const;

 private:
  Trainer(TrainConfig config, const DatasetIndex& data, std::string out_dir,
          std::ostream* log, Model model);
  EpochLog run_epoch();
  void write_csv_row(const EpochLog& e);

  TrainConfig config_;
  DatasetIndex data_;
  std::string out_dir_;
  std::ostream* log_;
  Model model_;
  SplitData train_;
  SplitData val_;
  std::vector<double> class_weights_;
  AdamState adam_;
  Rng rng_;
  Index epoch_ = 0;
  Index step_ = 0;
  double best_score_ = -1;
  Index best_epoch_ = -1;
  bool target_reached_ = false;
  bool first_step_taken_ = false;
  LossBreakdown first_step_;
};

RADSEG_NAMESPACE_END
