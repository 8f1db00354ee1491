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


#include "ams/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "ams/errors.hpp"
#include "ams/harness/train.hpp"

namespace ams::harness {

std::vector<QuerySplit> make_splits(std::span<const int> ids, const EvalConfig& cfg) {
  cfg.validate();
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ids.size(); ++i) groups[ids[i]].push_back(i);
  for (const auto& [id, members] : groups) {
    if (members.size() < 2) {
      throw InputError("identity " + std::to_string(id) + " has a single image; it cannot be both query and gallery");
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<QuerySplit> splits;
  for (std::size_t s = 0; s < cfg.splits; ++s) {
    QuerySplit split;
    for (auto [id, members] : groups) {
      std::shuffle(members.begin(), members.end(), rng);
      const auto n = members.size();
      const auto q = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(cfg.query_fraction * static_cast<double>(n))), 1, n - 1);
      split.query.insert(split.query.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(q));
      split.gallery.insert(split.gallery.end(), members.begin() + static_cast<std::ptrdiff_t>(q), members.end());
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

EvalReport evaluate_embeddings(const RowMatrix& embeddings, std::span<const int> ids, const EvalConfig& cfg) {
  if (static_cast<std::size_t>(embeddings.rows()) != ids.size()) {
    throw InputError("evaluate: embedding rows and identity labels differ in count");
  }
  EvalReport report;
  for (const QuerySplit& split : make_splits(ids, cfg)) {
    auto pick = [&](const std::vector<std::size_t>& rows, RowMatrix& m, std::vector<int>& labels) {
      m.resize(static_cast<Eigen::Index>(rows.size()), embeddings.cols());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = embeddings.row(static_cast<Eigen::Index>(rows[i]));
        labels.push_back(ids[rows[i]]);
      }
    };
    RowMatrix q, g;
    std::vector<int> qid, gid;
    pick(split.query, q, qid);
    pick(split.gallery, g, gid);
    const RetrievalReport r = retrieval_eval(q, qid, g, gid);
    report.split_map.push_back(r.map);
    report.split_rank1.push_back(r.cmc.front());
    if (report.cmc.empty()) report.cmc.assign(r.cmc.size(), 0.0);
    for (std::size_t k = 0; k < r.cmc.size(); ++k) report.cmc[k] += r.cmc[k];
  }
  const double n = static_cast<double>(report.split_map.size());
  for (double& c : report.cmc) c /= n;
  for (double m : report.split_map) report.map += m / n;
  for (double r : report.split_rank1) report.rank1 += r / n;
  return report;
}

EvalReport evaluate(Model& model, const SyntheticDataset& data, const EvalConfig& cfg) {
  const RowMatrix emb = model.embed(data.images);
  if (!emb.allFinite()) throw NumericalError("evaluate", "non-finite embeddings");
  return evaluate_embeddings(emb, data.ids, cfg);
}

EvalReport evaluate(const Checkpoint& ckpt, const SyntheticDataset& data, const EvalConfig& cfg) {
  Model model = restore_model(ckpt);
  return evaluate(model, data, cfg);
}

RandomRankingBaseline random_ranking_baseline(std::span<const int> ids, const EvalConfig& cfg) {
  // For G gallery items of which R are relevant, a uniformly random ranking has
  // E[AP] = (1/G) sum_k (1/k + (k-1)/k * (R-1)/(G-1)). The per-split spread is
  // estimated by simulation with a fixed seed.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  RandomRankingBaseline out;
  std::vector<double> sims;
  const auto splits = make_splits(ids, cfg);
  for (const QuerySplit& split : splits) {
    std::map<int, std::size_t> relevant;
    for (std::size_t j : split.gallery) ++relevant[ids[j]];
    const double G = static_cast<double>(split.gallery.size());
    double expected = 0.0;
    for (std::size_t qi : split.query) {
      const double R = static_cast<double>(relevant[ids[qi]]);
      double e = 0.0;
      for (double k = 1.0; k <= G; k += 1.0) e += 1.0 / k + (k - 1.0) / k * (R - 1.0) / (G - 1.0);
      expected += e / G;
    }
    out.mean += expected / static_cast<double>(split.query.size()) / static_cast<double>(splits.size());
  }
  const QuerySplit& first = splits.front();
  std::vector<int> gallery_ids;
  for (std::size_t j : first.gallery) gallery_ids.push_back(ids[j]);
  for (int trial = 0; trial < 400; ++trial) {
    double total = 0.0;
    for (std::size_t qi : first.query) {
      std::vector<int> order = gallery_ids;
      std::shuffle(order.begin(), order.end(), rng);
      double hits = 0.0, ap = 0.0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (order[k] == ids[qi]) {
          hits += 1.0;
          ap += hits / static_cast<double>(k + 1);
        }
      }
      total += ap / hits;
    }
    sims.push_back(total / static_cast<double>(first.query.size()));
  }
  double mean = 0.0, var = 0.0;
  for (double s : sims) mean += s / static_cast<double>(sims.size());
  for (double s : sims) var += (s - mean) * (s - mean) / static_cast<double>(sims.size() - 1);
  out.sd = std::sqrt(var);
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"map", r.map}, {"rank1", r.rank1}, {"cmc", r.cmc}, {"split_map", r.split_map}, {"split_rank1", r.split_rank1}};
}

}  // namespace ams::harness
