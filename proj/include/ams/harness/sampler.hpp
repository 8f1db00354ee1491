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

#include <random>
#include <span>
#include <vector>

namespace ams::harness {

struct PkBatch {
  std::vector<std::size_t> indices;  // into the pool
  std::vector<int> labels;
  // Set when some identity had fewer than K images and was drawn with replacement.
  bool with_replacement = false;
};

/// P distinct identities without replacement, K images each.
PkBatch pk_sample(std::span<const int> labels, std::size_t p, std::size_t k, std::mt19937_64& rng);

/// One pass over the identities: shuffled, cut into groups of P (the
/// incomplete tail is dropped), K images drawn per identity.
std::vector<PkBatch> pk_epoch(std::span<const int> labels, std::size_t p, std::size_t k, std::mt19937_64& rng);

}  // namespace ams::harness
