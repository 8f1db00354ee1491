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

#include <span>

#include "ams/tensor.hpp"

namespace ams {

struct LossConfig {
  double margin = 0.3;
  double lambda_tri = 1.0;

  void validate() const;
};

struct LossResult {
  double value = 0.0;
  RowMatrix grad;  // same shape as the loss input
};

/// Mean over samples of -log softmax(logits_i)[label_i], log-sum-exp
/// stabilised. Gradient is (softmax - onehot) / N.
LossResult softmax_cross_entropy(const RowMatrix& logits, std::span<const int> labels);

/// Batch-hard triplet loss on non-squared Euclidean distances, summed over
/// anchors: sum_i [d(i, hardest positive) - d(i, hardest negative) + margin]_+.
/// Ties pick the lowest index; the hinge kink contributes zero gradient.
LossResult batch_hard_triplet(const RowMatrix& features, std::span<const int> ids, const LossConfig& cfg);

double total_loss(double cls, double tri, const LossConfig& cfg);

/// Euclidean distance between rows, accumulated in column order.
double row_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j);

}  // namespace ams
