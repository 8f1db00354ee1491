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
#include <string>
#include <vector>

#include "json.hpp"

#include "ams/tensor.hpp"

namespace ams {

struct RetrievalReport {
  RowMatrix dist;                    // (Q, G) Euclidean distances
  std::vector<double> per_query_ap;  // Q values in [0, 1]
  double map = 0.0;
  std::vector<double> cmc;           // cmc[k-1] = Rank-k hit rate, k = 1..G
};

/// Ranks the gallery for every query by ascending distance (ties by gallery
/// index) and scores it. Every query id must occur in the gallery.
RetrievalReport retrieval_eval(const RowMatrix& query, std::span<const int> query_ids, const RowMatrix& gallery,
                               std::span<const int> gallery_ids);

/// {"map": ..., "cmc": [...], "per_query_ap": [...]}
nlohmann::json to_json(const RetrievalReport& report);
/// "rank,hit_rate" header followed by one row per k.
std::string cmc_csv(std::span<const double> cmc);

}  // namespace ams
