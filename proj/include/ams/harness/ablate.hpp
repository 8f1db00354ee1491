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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ams/harness/evaluate.hpp"
#include "ams/harness/train.hpp"

namespace ams::harness {

/// Leave-one-domain-out run: train on every domain except data.test_domain,
/// evaluate on the held-out one.
struct ExperimentResult {
  TrainResult trained;
  EvalReport unseen;
  std::vector<std::size_t> train_domains;
  std::size_t test_domain = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<SyntheticDataset>& domains);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Metrics document for a run; contains no timings, so identical runs give
/// identical bytes.
nlohmann::json metrics_json(const ExperimentConfig& cfg, const ExperimentResult& r);
std::string epoch_log_csv(const std::vector<EpochLog>& log);

struct AblationCell {
  std::string variant;
  std::size_t group_count = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double map = 0.0;
  double rank1 = 0.0;
  std::string failure;
};

struct AblationRow {
  std::string variant;
  std::size_t group_count = 0;
  std::size_t seeds = 0;
  std::size_t completed = 0;
  // Set when at least one (mean) or two (sd) seeds completed.
  std::optional<double> map_mean, map_sd, rank1_mean, rank1_sd;
  std::vector<std::string> failures;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  std::vector<AblationCell> cells;
  std::vector<std::string> warnings;
};

/// One training and evaluation per (variant, seed); seed sets train.seed.
/// Failures are recorded per cell instead of stopping the sweep. Independent
/// cells run on up to `workers` threads.
AblationTable ablate(const std::vector<VariantKind>& variants, const ExperimentConfig& base,
                     const std::vector<std::uint64_t>& seeds, std::size_t workers = 1);

/// Same as ablate for one variant across whitening group counts.
AblationTable group_sweep(const VariantKind& variant, const std::vector<std::size_t>& group_counts,
                          const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                          std::size_t workers = 1);

std::string to_csv(const AblationTable& table);
nlohmann::json to_json(const AblationTable& table);

}  // namespace ams::harness
