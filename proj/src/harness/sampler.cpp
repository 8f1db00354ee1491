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


#include "ams/harness/sampler.hpp"

#include <algorithm>
#include <map>

#include "ams/errors.hpp"

namespace ams::harness {

namespace {

std::map<int, std::vector<std::size_t>> by_identity(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return groups;
}

void draw(const std::vector<std::size_t>& pool, int label, std::size_t k, std::mt19937_64& rng, PkBatch& out) {
  if (pool.size() >= k) {
    std::vector<std::size_t> copy = pool;
    std::shuffle(copy.begin(), copy.end(), rng);
    out.indices.insert(out.indices.end(), copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t i = 0; i < k; ++i) out.indices.push_back(pool[pick(rng)]);
    out.with_replacement = true;
  }
  out.labels.insert(out.labels.end(), k, label);
}

}  // namespace

PkBatch pk_sample(std::span<const int> labels, std::size_t p, std::size_t k, std::mt19937_64& rng) {
  const auto groups = by_identity(labels);
  std::vector<int> ids;
  for (const auto& [id, members] : groups)
    if (members.size() >= 2) ids.push_back(id);
  if (ids.size() < p) {
    throw InputError("PK sampling needs " + std::to_string(p) + " identities with at least two images, pool has " +
                     std::to_string(ids.size()));
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  PkBatch batch;
  for (std::size_t i = 0; i < p; ++i) draw(groups.at(ids[i]), ids[i], k, rng, batch);
  return batch;
}

std::vector<PkBatch> pk_epoch(std::span<const int> labels, std::size_t p, std::size_t k, std::mt19937_64& rng) {
  const auto groups = by_identity(labels);
  std::vector<int> ids;
  for (const auto& [id, members] : groups)
    if (members.size() >= 2) ids.push_back(id);
  if (ids.size() < p) {
    throw InputError("PK sampling needs " + std::to_string(p) + " identities with at least two images, pool has " +
                     std::to_string(ids.size()));
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<PkBatch> out;
  for (std::size_t start = 0; start + p <= ids.size(); start += p) {
    PkBatch batch;
    for (std::size_t i = start; i < start + p; ++i) draw(groups.at(ids[i]), ids[i], k, rng, batch);
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace ams::harness
