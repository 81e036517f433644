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

#include <array>
#include <vector>

#include "radseg/tensor.hpp"

RADSEG_NAMESPACE_BEGIN

// Parameters of one convolution (regular or transposed) over 2 or 3 spatial
// axes. Regular: weights are out x in x kernel. Transposed: in x out x kernel.
struct ConvSpec {
  Index in_channels = 0;
  Index out_channels = 0;
  std::vector<Index> kernel;
  std::vector<Index> stride;
  std::vector<Index> padding;
  std::vector<Index> dilation;
  Tensor weights;
  Tensor bias;  // optional

  int spatial_rank() const { return static_cast<int>(kernel.size()); }

  // Fills missing stride/padding/dilation with defaults, allocates zeroed
  // weights (and bias when `with_bias`).
  static ConvSpec make(Index in_channels, Index out_channels,
                       std::vector<Index> kernel, std::vector<Index> stride = {},
                       std::vector<Index> padding = {},
                       std::vector<Index> dilation = {}, bool with_bias = true,
                       bool transposed = false);

  // Regular conv: floor((in + 2p - d(k-1) - 1)/s) + 1 per axis.
  std::vector<Index> output_extent(const std::vector<Index>& in) const;
  // Transposed conv: (in-1)s - 2p + d(k-1) + 1 per axis.
  std::vector<Index> transposed_output_extent(const std::vector<Index>& in) const;
  Index parameter_count() const;
};

Tensor conv2d(const Tensor& x, const ConvSpec& spec);
Tensor conv3d(const Tensor& x, const ConvSpec& spec);
Tensor conv_transpose2d(const Tensor& x, const ConvSpec& spec);

// Pooling windows without padding; kernel/stride given as (h, w).
Tensor maxpool2d(const Tensor& x, std::array<Index, 2> kernel,
                 std::array<Index, 2> stride);

struct BatchNormParams {
  Tensor gamma;
  Tensor beta;
  Tensor running_mean;
  Tensor running_var;
  Real momentum = Real(0.1);
  Real eps = Real(1e-5);

  static BatchNormParams make(Index channels);
};

// Per-channel normalization over every axis except 1. Training mode uses
// batch statistics and updates the running buffers.
Tensor batch_norm(const Tensor& x, BatchNormParams& params, bool training);

Tensor leaky_relu(const Tensor& x, Real slope = Real(0.01));

// Softmax across axis 1 at every remaining location.
Tensor softmax_channels(const Tensor& x);

Tensor concat_channels(const std::vector<Tensor>& xs);
Tensor slice_channels(const Tensor& x, Index begin, Index count);

Tensor reshape(const Tensor& x, Shape shape);

// Mean over all axes after 1: [B, C, ...] -> [B, C, 1, 1].
Tensor global_avg_pool(const Tensor& x);
// [B, C, 1, 1] -> [B, C, h, w] by replication.
Tensor broadcast_spatial(const Tensor& x, Index h, Index w);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real factor);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Flip along one axis.
Tensor flip(const Tensor& x, int axis);

RADSEG_NAMESPACE_END
