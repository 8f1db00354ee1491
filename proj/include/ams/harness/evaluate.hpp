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
#include <vector>

#include "json.hpp"

#include "ams/harness/checkpoint.hpp"
#include "ams/harness/config.hpp"
#include "ams/harness/model.hpp"
#include "ams/harness/synthetic.hpp"
#include "ams/retrieval.hpp"

namespace ams::harness {

/// One random query/gallery split: per identity, round(query_fraction * n)
/// images (at least one, at most n - 1) become queries.
struct QuerySplit {
  std::vector<std::size_t> query;
  std::vector<std::size_t> gallery;
};

std::vector<QuerySplit> make_splits(std::span<const int> ids, const EvalConfig& cfg);

struct EvalReport {
  double map = 0.0;    // averaged over splits
  double rank1 = 0.0;  // CMC[1], averaged over splits
  std::vector<double> cmc;
  std::vector<double> split_map;
  std::vector<double> split_rank1;
};

EvalReport evaluate_embeddings(const RowMatrix& embeddings, std::span<const int> ids, const EvalConfig& cfg);
EvalReport evaluate(Model& model, const SyntheticDataset& data, const EvalConfig& cfg);
EvalReport evaluate(const Checkpoint& ckpt, const SyntheticDataset& data, const EvalConfig& cfg);

/// Expected mAP of a uniformly random ranking on the same splits, and the
/// standard deviation of one split's mAP under that null.
struct RandomRankingBaseline {
  double mean = 0.0;
  double sd = 0.0;
};

RandomRankingBaseline random_ranking_baseline(std::span<const int> ids, const EvalConfig& cfg);

nlohmann::json to_json(const EvalReport& r);

}  // namespace ams::harness
