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

#include "ams/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "ams/errors.hpp"
#include "ams/losses.hpp"

namespace ams {

RetrievalReport retrieval_eval(const RowMatrix& query, std::span<const int> query_ids, const RowMatrix& gallery,
                               std::span<const int> gallery_ids) {
  const Eigen::Index nq = query.rows(), ng = gallery.rows();
  if (static_cast<std::size_t>(nq) != query_ids.size() || static_cast<std::size_t>(ng) != gallery_ids.size()) {
    throw InputError("retrieval_eval: embedding rows and id counts differ");
  }
  if (query.cols() != gallery.cols()) throw InputError("retrieval_eval: query and gallery dimensions differ");
  if (nq == 0 || ng == 0) throw InputError("retrieval_eval: empty query or gallery");
  for (int id : query_ids) {
    if (std::find(gallery_ids.begin(), gallery_ids.end(), id) == gallery_ids.end()) {
      throw InputError("retrieval_eval: query identity " + std::to_string(id) + " is absent from the gallery");
    }
  }

  RetrievalReport report;
  report.dist.resize(nq, ng);
  report.per_query_ap.assign(static_cast<std::size_t>(nq), 0.0);
  std::vector<double> hits(static_cast<std::size_t>(ng), 0.0);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ng));
  for (Eigen::Index q = 0; q < nq; ++q) {
    for (Eigen::Index g = 0; g < ng; ++g) report.dist(q, g) = row_distance(query, q, gallery, g);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double da = report.dist(q, a), db = report.dist(q, b);
      return da < db || (da == db && a < b);
    });
    const int id = query_ids[static_cast<std::size_t>(q)];
    std::size_t relevant = 0, first_hit = order.size();
    double precision_sum = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (gallery_ids[static_cast<std::size_t>(order[r])] != id) continue;
      ++relevant;
      precision_sum += static_cast<double>(relevant) / static_cast<double>(r + 1);
      first_hit = std::min(first_hit, r);
    }
    report.per_query_ap[static_cast<std::size_t>(q)] = precision_sum / static_cast<double>(relevant);
    for (std::size_t k = first_hit; k < hits.size(); ++k) hits[k] += 1.0;
  }
  report.map = std::accumulate(report.per_query_ap.begin(), report.per_query_ap.end(), 0.0) / static_cast<double>(nq);
  report.cmc.resize(hits.size());
  for (std::size_t k = 0; k < hits.size(); ++k) report.cmc[k] = hits[k] / static_cast<double>(nq);
  return report;
}

nlohmann::json to_json(const RetrievalReport& report) {
  return nlohmann::json{{"map", report.map}, {"cmc", report.cmc}, {"per_query_ap", report.per_query_ap}};
}

std::string cmc_csv(std::span<const double> cmc) {
  std::ostringstream out;
  out.precision(17);
  out << "rank,hit_rate\n";
  for (std::size_t k = 0; k < cmc.size(); ++k) out << (k + 1) << ',' << cmc[k] << '\n';
  return out.str();
}

}  // namespace ams
