// Copyright 2026 The AMS Authors. All Rights Reserved.
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
#include <random>
#include <vector>

#include "ams/tensor.hpp"

namespace ams {

/// Shared two-layer MLP (C -> C/r -> C, ReLU in between, no biases) applied
/// to the average- and max-pooled channel descriptors.
struct ChannelAttentionParams {
  Tensor4 w1;  // (C/r, C, 1, 1)
  Tensor4 w2;  // (C, C/r, 1, 1)
  std::size_t reduction = 16;

  static ChannelAttentionParams zeros(std::size_t channels, std::size_t reduction);
  static ChannelAttentionParams random(std::size_t channels, std::size_t reduction, std::mt19937_64& rng);
  std::size_t channels() const { return w1.shape().c; }
  std::size_t hidden() const { return w1.shape().b; }
  void validate(std::size_t channels) const;
};

/// A single-output convolution over the [mean_C, max_C] map.
struct SpatialAttentionParams {
  Tensor4 kernel;  // (1, 2, k, k)

  static SpatialAttentionParams zeros(std::size_t k);
  static SpatialAttentionParams random(std::size_t k, std::mt19937_64& rng);
  std::size_t kernel_size() const { return kernel.shape().h; }
  void validate() const;
};

struct ChannelAttentionCache {
  std::vector<double> avg;         // (B, C)
  std::vector<double> max;         // (B, C)
  std::vector<std::size_t> argmax; // flat spatial index of the max, (B, C)
  std::vector<double> hidden_avg;  // pre-ReLU, (B, C/r)
  std::vector<double> hidden_max;  // pre-ReLU, (B, C/r)
  Tensor4 mask;                    // (B, C, 1, 1)
};

struct SpatialAttentionCache {
  Tensor4 pooled;                  // (B, 2, H, W): channel mean and max
  std::vector<std::size_t> argmax; // channel of the max, (B, H*W)
  Tensor4 mask;                    // (B, 1, H, W)
};

struct ChannelAttentionResult {
  Tensor4 output;
  ChannelAttentionCache cache;
};

struct SpatialAttentionResult {
  Tensor4 output;
  SpatialAttentionCache cache;
};

/// mask = sigmoid(MLP(avgpool(x)) + MLP(maxpool(x))); returns mask * x.
ChannelAttentionResult channel_attention(const Tensor4& x, const ChannelAttentionParams& p);
Tensor4 channel_attention_backward(const Tensor4& x, ChannelAttentionParams& p, const ChannelAttentionCache& cache,
                                   const Tensor4& dy);

/// mask = sigmoid(conv([mean_C(x); max_C(x)])); returns mask * x.
SpatialAttentionResult spatial_attention(const Tensor4& x, const SpatialAttentionParams& p);
Tensor4 spatial_attention_backward(const Tensor4& x, SpatialAttentionParams& p, const SpatialAttentionCache& cache,
                                   const Tensor4& dy);

}  // namespace ams
