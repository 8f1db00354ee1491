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

#include <vector>

#include "ams/tensor.hpp"

namespace ams {

/// Per-channel affine parameters of instance normalization. gamma and beta
/// are (1, C, 1, 1) tensors so they carry their own gradient buffers.
struct InParams {
  Tensor4 gamma;
  Tensor4 beta;
  double epsilon = 1e-5;

  // gamma = 1, beta = 0.
  static InParams identity(std::size_t channels, double epsilon = 1e-5);
  std::size_t channels() const { return gamma.shape().c; }
  void validate(std::size_t channels) const;
};

/// Per (sample, channel) mean and biased standard deviation over H*W,
/// stored row-major as (B, C).
struct NormStats {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::vector<double> mean;
  std::vector<double> std;
};

struct InstanceNormResult {
  Tensor4 output;
  NormStats stats;
};

/// y = gamma * (x - mu) / (sigma + eps) + beta, statistics per sample and
/// channel over the spatial positions. The epsilon sits on the standard
/// deviation, not on the variance.
InstanceNormResult instance_norm(const Tensor4& x, const InParams& p);

/// Returns dL/dx and accumulates dL/dgamma, dL/dbeta into p's buffers.
Tensor4 instance_norm_backward(const Tensor4& x, InParams& p, const NormStats& stats, const Tensor4& dy);

}  // namespace ams
