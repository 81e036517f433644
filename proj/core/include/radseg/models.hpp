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
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "radseg/ops.hpp"

RADSEG_NAMESPACE_BEGIN

enum class Variant { kMvNet, kMvaNetA, kMvaNetB, kTmvaNet };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct ModelConfig {
  Variant variant = Variant::kTmvaNet;
  int n_classes = 4;
  int q = -1;  // past frames; -1 picks 2 (2D models) or 4 (temporal model)
  Index n_range = 256;
  Index n_angle = 256;
  Index n_doppler = 64;
  double width = 1.0;  // multiplier on the 128 base channels
  std::vector<Index> aspp_rates{6, 12, 18};

  int frames() const;
  Index channels() const;
  bool uses_ad() const;
  bool has_aspp() const;
  bool temporal() const;
  // Throws ConfigError naming the first layer whose extents do not compose.
  void validate() const;
};

// Batched view stacks: [B, q+1, H, W] for the 2D models, [B, 1, q+1, H, W]
// for the temporal model. `ad` is only read by variants with an AD branch.
struct ModelInput {
  Tensor rd;
  Tensor ra;
  Tensor ad;
};

struct SegmentationOutput {
  Tensor p_rd;  // [B, K, n_range, n_doppler]
  Tensor p_ra;  // [B, K, n_range, n_angle]
};

// Output extents (batch axis dropped) of one named layer.
struct LayerTrace {
  std::string name;
  Shape shape;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

class Model {
 public:
  explicit Model(ModelConfig config, std::uint64_t seed = 0);
  ~Model();
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;

  const ModelConfig& config() const { return config_; }

  // Softmax probabilities per view. `training` selects batch statistics in
  // every BN layer (and updates the running buffers).
  SegmentationOutput forward(const ModelInput& in, bool training,
                             std::vector<LayerTrace>* trace = nullptr);

  // Shape-only pass at batch 1 with the configured extents.
  std::vector<LayerTrace> trace_shapes();

  // Trainable tensors in registration order, e.g. "rd_layer1.conv0.weight".
  const std::vector<NamedTensor>& parameters() const { return params_; }
  // BN running statistics.
  const std::vector<NamedTensor>& buffers() const { return buffers_; }
  // (layer, parameter count) in table order, layers without weights omitted.
  std::vector<std::pair<std::string, Index>> parameter_table() const;
  Index parameter_count() const;

  // He-normal conv weights (std sqrt(2 / fan_in)), zero biases, BN scale 1 and
  // shift 0, running mean 0 and variance 1.
  void initialize(std::uint64_t seed);
  void zero_grad();
  void set_requires_grad(bool on);

  struct Impl;

 private:
  ModelConfig config_;
  std::unique_ptr<Impl> impl_;
  std::vector<NamedTensor> params_;
  std::vector<NamedTensor> buffers_;
};

RADSEG_NAMESPACE_END
