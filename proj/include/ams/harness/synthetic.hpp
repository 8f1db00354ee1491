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

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "ams/harness/config.hpp"
#include "ams/tensor.hpp"

namespace ams::harness {

/// Photometric style of one domain. Rendering applies
///   out_c = gain_c * illumination * (contrast * (base - 0.5) + 0.5) + offset_c + noise
/// where base is the identity layout over a domain-specific background texture.
struct SyntheticDomainSpec {
  std::size_t domain_id = 0;
  double illumination = 1.0;
  double contrast = 1.0;
  std::array<double, 3> color_gain{1.0, 1.0, 1.0};
  std::array<double, 3> color_offset{0.0, 0.0, 0.0};
  std::uint64_t texture_seed = 0;
  double texture_amplitude = 0.0;
  double noise_std = 0.0;

  static SyntheticDomainSpec identity_style(std::size_t domain_id);
  bool same_style(const SyntheticDomainSpec& o) const;
  void validate() const;
};

/// An identity: a coloured multi-part silhouette on a mid-grey background.
struct IdentityPrototype {
  std::uint64_t key = 0;
  Tensor4 image;  // (1, 3, H, W), values in [0, 1], background 0.5
  Tensor4 mask;   // (1, 1, H, W), 1 on the figure
};

IdentityPrototype make_prototype(std::uint64_t key, std::size_t height, std::size_t width);

/// Per-image nuisance: integer shift and brightness, plus the noise stream.
struct ImageJitter {
  int dx = 0;
  int dy = 0;
  double brightness = 1.0;
  std::uint64_t noise_seed = 0;
};

Tensor4 render(const IdentityPrototype& proto, const SyntheticDomainSpec& spec, const ImageJitter& jitter = {});

struct SyntheticDataset {
  SyntheticDomainSpec spec;
  Tensor4 images;                       // (N, 3, H, W)
  std::vector<int> ids;                 // dense in [0, num_ids)
  std::vector<std::uint64_t> prototype; // prototype key per image
  std::size_t num_ids = 0;

  std::size_t domain() const { return spec.domain_id; }
  std::size_t size() const { return ids.size(); }
  /// Copies image n as a (1, 3, H, W) tensor.
  Tensor4 image(std::size_t n) const;
};

/// Random styles around the identity style, spread by cfg.style_strength.
std::vector<SyntheticDomainSpec> default_domain_specs(const DataConfig& cfg);

std::vector<SyntheticDataset> generate_domains(const DataConfig& cfg);
std::vector<SyntheticDataset> generate_domains(const DataConfig& cfg, const std::vector<SyntheticDomainSpec>& specs);

/// Training domains pooled with globally offset labels.
struct TrainingPool {
  Tensor4 images;
  std::vector<int> labels;  // in [0, num_classes)
  std::vector<std::size_t> domain;
  std::size_t num_classes = 0;
  std::vector<std::size_t> domains;  // source domain ids
};

struct DomainSplit {
  std::vector<const SyntheticDataset*> train;
  const SyntheticDataset* test = nullptr;
};

/// Leave-one-domain-out split; throws InputError if the held-out domain leaks
/// into the training side.
DomainSplit leave_one_out(const std::vector<SyntheticDataset>& domains, std::size_t test_domain);
TrainingPool pool_domains(const std::vector<const SyntheticDataset*>& domains);

nlohmann::json to_json(const SyntheticDomainSpec& spec);

/// Writes images_<k>.bin (float64 LE), ids_<k>.bin (int32 LE) per domain and
/// manifest.json describing shapes and styles.
void export_datasets(const std::vector<SyntheticDataset>& domains, const std::string& dir);

}  // namespace ams::harness
