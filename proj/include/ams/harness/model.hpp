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

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ams/ams_block.hpp"
#include "ams/harness/config.hpp"
#include "ams/tensor.hpp"

namespace ams::harness {

/// Stride-1 same-padded convolution with a per-channel bias.
class Conv {
 public:
  Conv() = default;
  Conv(std::size_t in, std::size_t out, std::size_t k, double init_scale, std::mt19937_64& rng);

  Tensor4 forward(const Tensor4& x);
  Tensor4 backward(const Tensor4& dy);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  Tensor4 weight_;
  Tensor4 bias_;
  Tensor4 input_;
};

/// 1x1 reduce, 3x3, 1x1 expand, added to the input (or to a 1x1 projection
/// of it when the width changes), then ReLU.
class Bottleneck {
 public:
  Bottleneck(std::size_t in, std::size_t out, std::mt19937_64& rng);

  Tensor4 forward(const Tensor4& x);
  Tensor4 backward(const Tensor4& dy);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  Conv reduce_, mid_, expand_;
  std::optional<Conv> project_;
  Tensor4 a1_, a2_, out_;
};

struct ModelOutput {
  RowMatrix embedding;  // (B, D) globally average-pooled final features
  RowMatrix logits;     // (B, num_classes)
};

/// Stem, four bottleneck stages with 2x2 average pooling between them, AMS
/// blocks after the configured stages, global average pooling and a linear
/// classifier used only for training.
class Model {
 public:
  Model(const TrainConfig& cfg, std::size_t num_classes, std::mt19937_64& rng);
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;
  ~Model();

  ModelOutput forward(const Tensor4& images);
  /// Accumulates parameter gradients; either argument may be empty.
  void backward(const RowMatrix& d_embedding, const RowMatrix& d_logits);

  /// Embeddings of all images, evaluated in chunks.
  RowMatrix embed(const Tensor4& images, std::size_t chunk = 64);

  std::vector<ParamRef> parameters();
  void zero_grad();
  std::size_t num_classes() const { return num_classes_; }
  std::size_t embedding_dim() const { return widths_.back(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Stage;
  std::vector<std::size_t> widths_;
  std::size_t num_classes_ = 0;
  Conv stem_;
  Tensor4 stem_out_;
  std::vector<std::unique_ptr<Stage>> stages_;
  Tensor4 head_w_;  // (num_classes, D, 1, 1)
  Tensor4 head_b_;  // (1, num_classes, 1, 1)
  RowMatrix pooled_;
  Shape4 final_shape_;
  std::vector<std::string> warnings_;
};

/// Largest group count <= g dividing every width; 1 always qualifies.
std::size_t suggest_group_count(const std::vector<std::size_t>& widths, std::size_t g);

}  // namespace ams::harness
