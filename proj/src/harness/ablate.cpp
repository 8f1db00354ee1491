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


#include "ams/harness/ablate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "ams/errors.hpp"

namespace ams::harness {

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<SyntheticDataset>& domains) {
  cfg.validate();
  const DomainSplit split = leave_one_out(domains, cfg.data.test_domain);
  const TrainingPool pool = pool_domains(split.train);
  ExperimentResult r;
  r.train_domains = pool.domains;
  r.test_domain = split.test->domain();
  r.trained = train(cfg, pool);
  Model model = restore_model(r.trained.checkpoint);
  r.unseen = evaluate(model, *split.test, cfg.eval);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, generate_domains(cfg.data));
}

nlohmann::json metrics_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  nlohmann::json log = nlohmann::json::array();
  for (const EpochLog& e : r.trained.log) log.push_back(to_json(e));
  return {{"config", to_json(cfg)},
          {"train_domains", r.train_domains},
          {"test_domain", r.test_domain},
          {"epochs", log},
          {"unseen", to_json(r.unseen)},
          {"warnings", r.trained.warnings}};
}

std::string epoch_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << std::setprecision(17) << "epoch,lr,total,cls,tri,steps\n";
  for (const EpochLog& e : log)
    out << e.epoch << ',' << e.lr << ',' << e.total << ',' << e.cls << ',' << e.tri << ',' << e.steps << '\n';
  return out.str();
}

namespace {

struct CellSpec {
  VariantKind variant;
  std::size_t group_count;
  std::uint64_t seed;
};

AblationCell run_cell(const CellSpec& spec, const ExperimentConfig& base, const std::vector<SyntheticDataset>& domains) {
  AblationCell cell;
  cell.variant = spec.variant.label();
  cell.group_count = spec.group_count;
  cell.seed = spec.seed;
  ExperimentConfig cfg = base;
  cfg.train.variant = spec.variant;
  cfg.train.whiten.group_count = spec.group_count;
  cfg.train.seed = spec.seed;
  try {
    const ExperimentResult r = run_experiment(cfg, domains);
    cell.ok = true;
    cell.map = r.unseen.map;
    cell.rank1 = r.unseen.rank1;
  } catch (const TrainingAborted& e) {
    cell.failure = "numerical abort in " + e.stage() + " at epoch " + std::to_string(e.epoch()) + ", step " +
                   std::to_string(e.step());
  } catch (const Error& e) {
    cell.failure = e.what();
  }
  return cell;
}

AblationTable run_cells(const std::vector<CellSpec>& specs, const ExperimentConfig& base, std::size_t workers,
                        std::vector<std::string> warnings) {
  base.validate();
  const std::vector<SyntheticDataset> domains = generate_domains(base.data);
  AblationTable table;
  table.warnings = std::move(warnings);
  table.cells.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) table.cells[i] = run_cell(specs[i], base, domains);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, specs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const AblationCell& cell : table.cells) {
    auto it = std::find_if(table.rows.begin(), table.rows.end(), [&](const AblationRow& r) {
      return r.variant == cell.variant && r.group_count == cell.group_count;
    });
    if (it == table.rows.end()) {
      table.rows.push_back(AblationRow{cell.variant, cell.group_count, 0, 0, {}, {}, {}, {}, {}});
      it = std::prev(table.rows.end());
    }
    ++it->seeds;
    if (!cell.ok) it->failures.push_back("seed " + std::to_string(cell.seed) + ": " + cell.failure);
  }
  for (AblationRow& row : table.rows) {
    std::vector<double> maps, r1s;
    for (const AblationCell& cell : table.cells) {
      if (cell.ok && cell.variant == row.variant && cell.group_count == row.group_count) {
        maps.push_back(cell.map);
        r1s.push_back(cell.rank1);
      }
    }
    row.completed = maps.size();
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
      const double m = mean(v);
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    if (!maps.empty()) {
      row.map_mean = mean(maps);
      row.rank1_mean = mean(r1s);
    }
    if (maps.size() >= 2) {
      row.map_sd = sd(maps);
      row.rank1_sd = sd(r1s);
    }
  }
  return table;
}

void require_seeds(const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 3) throw ConfigError("ablation needs at least three seeds, got " + std::to_string(seeds.size()));
}

}  // namespace

AblationTable ablate(const std::vector<VariantKind>& variants, const ExperimentConfig& base,
                     const std::vector<std::uint64_t>& seeds, std::size_t workers) {
  require_seeds(seeds);
  std::vector<std::string> warnings;
  std::vector<VariantKind> unique;
  for (const VariantKind& v : variants) {
    if (std::find(unique.begin(), unique.end(), v) != unique.end()) {
      warnings.push_back("duplicate variant " + v.label() + " ignored");
      continue;
    }
    unique.push_back(v);
  }
  std::vector<CellSpec> specs;
  for (const VariantKind& v : unique)
    for (std::uint64_t s : seeds) specs.push_back({v, base.train.whiten.group_count, s});
  return run_cells(specs, base, workers, std::move(warnings));
}

AblationTable group_sweep(const VariantKind& variant, const std::vector<std::size_t>& group_counts,
                          const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                          std::size_t workers) {
  require_seeds(seeds);
  std::vector<std::string> warnings;
  std::vector<std::size_t> unique;
  for (std::size_t g : group_counts) {
    if (std::find(unique.begin(), unique.end(), g) != unique.end()) {
      warnings.push_back("duplicate group count " + std::to_string(g) + " ignored");
      continue;
    }
    unique.push_back(g);
  }
  std::vector<CellSpec> specs;
  for (std::size_t g : unique)
    for (std::uint64_t s : seeds) specs.push_back({variant, g, s});
  return run_cells(specs, base, workers, std::move(warnings));
}

std::string to_csv(const AblationTable& table) {
  std::ostringstream out;
  out << std::setprecision(10) << "variant,g,seeds,completed,map_mean,map_sd,rank1_mean,rank1_sd,failures\n";
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  for (const AblationRow& r : table.rows) {
    out << r.variant << ',' << r.group_count << ',' << r.seeds << ',' << r.completed << ',';
    opt(r.map_mean);
    out << ',';
    opt(r.map_sd);
    out << ',';
    opt(r.rank1_mean);
    out << ',';
    opt(r.rank1_sd);
    out << ",\"";
    for (std::size_t i = 0; i < r.failures.size(); ++i) {
      std::string f = r.failures[i];
      std::replace(f.begin(), f.end(), '"', '\'');
      out << (i ? "; " : "") << f;
    }
    out << "\"\n";
  }
  return out.str();
}

nlohmann::json to_json(const AblationTable& table) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array(), cells = nlohmann::json::array();
  for (const AblationRow& r : table.rows) {
    rows.push_back({{"variant", r.variant},
                    {"g", r.group_count},
                    {"seeds", r.seeds},
                    {"completed", r.completed},
                    {"map_mean", opt(r.map_mean)},
                    {"map_sd", opt(r.map_sd)},
                    {"rank1_mean", opt(r.rank1_mean)},
                    {"rank1_sd", opt(r.rank1_sd)},
                    {"failures", r.failures}});
  }
  for (const AblationCell& c : table.cells) {
    cells.push_back({{"variant", c.variant},
                     {"g", c.group_count},
                     {"seed", c.seed},
                     {"ok", c.ok},
                     {"map", c.ok ? nlohmann::json(c.map) : nlohmann::json(nullptr)},
                     {"rank1", c.ok ? nlohmann::json(c.rank1) : nlohmann::json(nullptr)},
                     {"failure", c.failure}});
  }
  return {{"rows", rows}, {"cells", cells}, {"warnings", table.warnings}};
}

}  // namespace ams::harness
