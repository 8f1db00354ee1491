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


// Command-line front end: check, train, eval, ablate, gen-data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ams/errors.hpp"
#include "ams/harness/ablate.hpp"
#include "ams/harness/self_check.hpp"

namespace {

using namespace ams;
using namespace ams::harness;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<int> epochs;
  std::optional<std::size_t> group_count;
  std::optional<std::string> precision;
  std::optional<std::size_t> test_domain;
  std::optional<std::uint64_t> data_seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment config (unknown keys are rejected)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "training seed");
    app->add_option("--variant", variant, "variant label, e.g. none, IN_GW, IN_GW:SA,CA or AMS");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--group-count", group_count, "whitening group count g");
    app->add_option("--precision", precision, "f64 or f32");
    app->add_option("--test-domain", test_domain, "held-out domain index");
    app->add_option("--data-seed", data_seed, "synthetic data seed");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg = ExperimentConfig::desk_scale();
    if (!config.empty()) cfg = load_experiment(config, cfg);
    if (seed) cfg.train.seed = *seed;
    if (variant) cfg.train.variant = parse_variant(*variant);
    if (epochs) {
      cfg.train.epochs = *epochs;
      if (cfg.train.warmup_epochs >= *epochs) cfg.train.warmup_epochs = std::max(0, *epochs / 10);
    }
    if (group_count) cfg.train.whiten.group_count = *group_count;
    if (precision) cfg.train.precision = parse_precision(*precision);
    if (test_domain) cfg.data.test_domain = *test_domain;
    if (data_seed) cfg.data.seed = *data_seed;
    cfg.validate();
    return cfg;
  }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

std::filesystem::path prepare_out(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  // Variant labels themselves contain commas ("IN_GW:SA,CA"), so lists are
  // separated by ';' when any item carries an attention selector.
  const char sep = text.find(';') != std::string::npos ? ';' : ',';
  while (std::getline(in, item, sep))
    if (!item.empty()) items.push_back(item);
  return items;
}

int cmd_check(const std::string& out) {
  int failed = 0;
  nlohmann::json report = nlohmann::json::array();
  for (const NamedCheck& c : invariant_checks()) {
    const CheckResult r = run_check(c);
    std::cout << (r.passed ? "PASS " : "FAIL ") << c.id << "  " << c.description << "  [" << r.detail << "]\n";
    report.push_back({{"id", c.id}, {"passed", r.passed}, {"detail", r.detail}});
    if (!r.passed) ++failed;
  }
  if (!out.empty()) write_file(prepare_out(out) / "check.json", report.dump(2) + "\n");
  std::cout << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
  return failed ? kExitError : 0;
}

int cmd_train(const Overrides& o, const std::string& out, const std::string& checkpoint) {
  const ExperimentConfig cfg = o.resolve();
  const ExperimentResult r = run_experiment(cfg);
  for (const auto& w : r.trained.warnings) std::cerr << "warning: " << w << "\n";
  const auto dir = prepare_out(out);
  write_file(dir / "metrics.json", metrics_json(cfg, r).dump(2) + "\n");
  write_file(dir / "epochs.csv", epoch_log_csv(r.trained.log));
  write_file(dir / "cmc.csv", cmc_csv(r.unseen.cmc));
  save_checkpoint(r.trained.checkpoint, checkpoint.empty() ? (dir / "model.ckpt").string() : checkpoint);
  std::cout << std::fixed << std::setprecision(4) << "unseen domain " << r.test_domain << ": mAP " << r.unseen.map
            << ", Rank-1 " << r.unseen.rank1 << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, std::optional<std::size_t> domain, std::optional<std::size_t> splits,
             const std::string& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  ExperimentConfig cfg = experiment_from_json(ckpt.config);
  if (splits) cfg.eval.splits = *splits;
  const std::size_t target = domain.value_or(cfg.data.test_domain);
  const auto domains = generate_domains(cfg.data);
  if (target >= domains.size()) throw ConfigError("domain " + std::to_string(target) + " does not exist");
  const EvalReport r = evaluate(ckpt, domains[target], cfg.eval);
  const auto dir = prepare_out(out);
  nlohmann::json j = to_json(r);
  j["domain"] = target;
  j["held_out"] = target == cfg.data.test_domain;
  write_file(dir / "eval.json", j.dump(2) + "\n");
  write_file(dir / "cmc.csv", cmc_csv(r.cmc));
  std::cout << std::fixed << std::setprecision(4) << "domain " << target << ": mAP " << r.map << ", Rank-1 "
            << r.rank1 << "\n";
  return 0;
}

int cmd_ablate(const Overrides& o, const std::string& variants, std::size_t seeds, const std::string& g_sweep,
               std::size_t workers, const std::string& out) {
  const ExperimentConfig cfg = o.resolve();
  std::vector<std::uint64_t> seed_list;
  for (std::size_t s = 0; s < seeds; ++s) seed_list.push_back(cfg.train.seed + s);
  const auto dir = prepare_out(out);

  std::vector<VariantKind> kinds;
  for (const auto& v : split_list(variants)) kinds.push_back(parse_variant(v));
  const AblationTable table = ablate(kinds, cfg, seed_list, workers);
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << "\n";
  write_file(dir / "ablation.csv", to_csv(table));
  write_file(dir / "ablation.json", to_json(table).dump(2) + "\n");
  std::cout << to_csv(table);

  if (!g_sweep.empty()) {
    std::vector<std::size_t> gs;
    for (const auto& g : split_list(g_sweep)) gs.push_back(static_cast<std::size_t>(std::stoul(g)));
    const VariantKind v = kinds.empty() ? VariantKind::plain(Combination::in_gw) : kinds.back();
    const AblationTable sweep = group_sweep(v, gs, cfg, seed_list, workers);
    for (const auto& w : sweep.warnings) std::cerr << "warning: " << w << "\n";
    write_file(dir / "g_sweep.csv", to_csv(sweep));
    write_file(dir / "g_sweep.json", to_json(sweep).dump(2) + "\n");
    std::cout << to_csv(sweep);
  }
  return 0;
}

int cmd_gen_data(const Overrides& o, const std::string& out) {
  const ExperimentConfig cfg = o.resolve();
  const auto domains = generate_domains(cfg.data);
  export_datasets(domains, out);
  std::cout << "wrote " << domains.size() << " domains to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amsctl: AMS normalization library checks, training and evaluation"};
  app.require_subcommand(1);

  std::string out;
  auto* check = app.add_subcommand("check", "run the invariant, oracle and gradient suites");
  check->add_option("--out", out, "directory for check.json");

  Overrides train_o;
  std::string checkpoint;
  auto* train_cmd = app.add_subcommand("train", "train on the source domains and evaluate on the held-out one");
  train_o.attach(train_cmd);
  train_cmd->add_option("--out", out, "output directory for metrics.json, epochs.csv, cmc.csv")->required();
  train_cmd->add_option("--checkpoint", checkpoint, "checkpoint path (default <out>/model.ckpt)");

  std::string eval_ckpt;
  std::optional<std::size_t> eval_domain, eval_splits;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on one domain");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint written by train")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--domain", eval_domain, "domain to evaluate (default: the held-out domain)");
  eval_cmd->add_option("--splits", eval_splits, "number of random query/gallery splits");
  eval_cmd->add_option("--out", out, "output directory for eval.json and cmc.csv")->required();

  Overrides ablate_o;
  std::string variants = "none,IN_GW", g_sweep;
  std::size_t seeds = 3, workers = 1;
  auto* ablate_cmd = app.add_subcommand("ablate", "variant table and optional group-count sweep over seeds");
  ablate_o.attach(ablate_cmd);
  ablate_cmd->add_option("--variants", variants, "variant labels, comma separated (';' if labels contain ',')");
  ablate_cmd->add_option("--seeds", seeds, "number of seeds, starting at --seed")->check(CLI::Range(3, 1000));
  ablate_cmd->add_option("--g-sweep", g_sweep, "group counts for a sweep of the last variant, e.g. 2,4,8,16");
  ablate_cmd->add_option("--workers", workers, "concurrent cells")->check(CLI::Range(1, 64));
  ablate_cmd->add_option("--out", out, "output directory for ablation.csv/json")->required();

  Overrides gen_o;
  auto* gen_cmd = app.add_subcommand("gen-data", "export the synthetic domains as raw tensors plus manifest.json");
  gen_o.attach(gen_cmd);
  gen_cmd->add_option("--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*check) return cmd_check(out);
    if (*train_cmd) return cmd_train(train_o, out, checkpoint);
    if (*eval_cmd) return cmd_eval(eval_ckpt, eval_domain, eval_splits, out);
    if (*ablate_cmd) return cmd_ablate(ablate_o, variants, seeds, g_sweep, workers, out);
    if (*gen_cmd) return cmd_gen_data(gen_o, out);
  } catch (const TrainingAborted& e) {
    std::cerr << "numerical abort in " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error in " << e.stage() << ": " << e.detail() << "\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
