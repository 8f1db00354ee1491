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
#include <string>
#include <vector>

#include "json.hpp"

#include "ams/ams_block.hpp"
#include "ams/losses.hpp"

namespace ams::harness {

enum class Precision { f64, f32 };

std::string to_string(Precision p);
Precision parse_precision(const std::string& name);

struct Augmentation {
  bool hflip = true;
  bool crop = true;
  bool erase = false;
};

struct TrainConfig {
  int epochs = 60;
  double base_lr = 3.5e-4;
  double final_lr = 7.7e-7;
  int warmup_epochs = 10;
  std::size_t p = 8;   // identities per batch
  std::size_t k = 16;  // images per identity
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  Precision precision = Precision::f64;
  Augmentation augment;
  VariantKind variant = VariantKind::plain(Combination::none);
  std::vector<int> placements{1, 2, 3};
  std::vector<std::size_t> widths{32, 64, 128, 128};
  std::size_t stem_width = 32;
  LossConfig loss;
  double in_epsilon = 1e-5;
  WhitenConfig whiten;
  std::size_t reduction = 4;
  std::size_t sa_kernel = 3;

  std::size_t batch_size() const { return p * k; }
  void validate() const;
};

struct DataConfig {
  std::size_t num_domains = 4;
  std::size_t ids_per_domain = 16;
  std::size_t images_per_id = 8;
  std::size_t height = 16;
  std::size_t width = 8;
  double noise_std = 0.02;
  // Global multiplier on how far domain styles are spread apart.
  double style_strength = 1.0;
  // Extra multiplier on the held-out domain's style deviation.
  double unseen_style_scale = 1.0;
  // When positive, replaces the held-out domain's contrast.
  double unseen_contrast = 0.0;
  double texture_amplitude = 0.15;
  // When set, every domain renders the same identity prototypes.
  bool shared_identities = false;
  std::uint64_t seed = 1;
  std::size_t test_domain = 3;

  void validate() const;
};

struct EvalConfig {
  std::size_t splits = 10;
  double query_fraction = 0.25;
  std::uint64_t seed = 123;

  void validate() const;
};

struct ExperimentConfig {
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;

  void validate() const;

  /// Settings sized for a single CPU core: 16x8 images, P=8 x K=4 batches,
  /// 30 epochs with 3 warmup epochs. Other fields keep their defaults.
  static ExperimentConfig desk_scale();
};

/// Keys absent from j keep their value in base; unknown keys raise
/// ConfigError naming the offending path.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});
nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment(const std::string& path, const ExperimentConfig& base = {});

}  // namespace ams::harness
