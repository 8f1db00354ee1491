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


#include "ams/harness/config.hpp"

#include <fstream>
#include <set>

#include "ams/errors.hpp"

namespace ams::harness {

using nlohmann::json;

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& name) {
  if (name == "f64" || name == "float64") return Precision::f64;
  if (name == "f32" || name == "float32") return Precision::f32;
  throw ConfigError("unknown precision '" + name + "' (expected f64 or f32)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (warmup_epochs < 0 || warmup_epochs >= epochs) throw ConfigError("warmup_epochs must lie in [0, epochs)");
  if (!(base_lr > 0.0) || !(final_lr >= 0.0) || final_lr > base_lr) {
    throw ConfigError("learning rates must satisfy 0 <= final_lr <= base_lr, base_lr > 0");
  }
  if (p < 2) throw ConfigError("P must be at least 2 identities");
  if (k < 2) throw ConfigError("K must be at least 2 images per identity");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (widths.size() != 4) throw ConfigError("widths must list four stage widths");
  for (std::size_t w : widths)
    if (w < 4 || w % 4 != 0) throw ConfigError("stage widths must be positive multiples of 4");
  if (stem_width == 0) throw ConfigError("stem_width must be positive");
  for (int pl : placements)
    if (pl < 1 || pl > 4) throw ConfigError("placements must be stage numbers in 1..4");
  if (!(in_epsilon > 0.0)) throw ConfigError("in_epsilon must be positive");
  if (reduction == 0) throw ConfigError("reduction must be positive");
  if (sa_kernel % 2 == 0) throw ConfigError("sa_kernel must be odd");
  loss.validate();
  if (!(whiten.epsilon > 0.0) || whiten.ns_iterations < 1 || !(whiten.residual_tolerance > 0.0)) {
    throw ConfigError("whitening epsilon, ns_iterations and residual_tolerance must be positive");
  }
}

void DataConfig::validate() const {
  if (num_domains < 2) throw ConfigError("num_domains must be at least 2");
  if (ids_per_domain < 2) throw ConfigError("ids_per_domain must be at least 2");
  if (images_per_id < 2) throw ConfigError("images_per_id must be at least 2");
  if (height < 4 || width < 4) throw ConfigError("images must be at least 4x4");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
  if (!(style_strength >= 0.0)) throw ConfigError("style_strength must be non-negative");
  if (!(unseen_style_scale >= 0.0)) throw ConfigError("unseen_style_scale must be non-negative");
  if (!(unseen_contrast >= 0.0)) throw ConfigError("unseen_contrast must be non-negative (0 keeps the drawn value)");
  if (!(texture_amplitude >= 0.0)) throw ConfigError("texture_amplitude must be non-negative");
  if (test_domain >= num_domains) throw ConfigError("test_domain must index one of the domains");
}

void EvalConfig::validate() const {
  if (splits == 0) throw ConfigError("splits must be positive");
  if (!(query_fraction > 0.0) || !(query_fraction < 1.0)) throw ConfigError("query_fraction must lie in (0, 1)");
}

void ExperimentConfig::validate() const {
  train.validate();
  data.validate();
  eval.validate();
  if (train.k > data.images_per_id) {
    throw ConfigError("K=" + std::to_string(train.k) + " exceeds images_per_id=" + std::to_string(data.images_per_id));
  }
  const std::size_t train_ids = (data.num_domains - 1) * data.ids_per_domain;
  if (train.p > train_ids) {
    throw ConfigError("P=" + std::to_string(train.p) + " exceeds the " + std::to_string(train_ids) +
                      " training identities");
  }
}

ExperimentConfig ExperimentConfig::desk_scale() {
  ExperimentConfig cfg;
  cfg.train.epochs = 30;
  cfg.train.warmup_epochs = 3;
  cfg.train.base_lr = 1e-3;
  cfg.train.final_lr = 1e-5;
  cfg.train.k = 4;
  return cfg;
}

namespace {

// Reads known keys from an object and rejects anything else.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string child_path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + path_ + "." + it.key() + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_whiten(const json& j, const std::string& path, WhitenConfig& w) {
  Reader r(j, path);
  r.get("group_count", w.group_count);
  r.get("epsilon", w.epsilon);
  r.get("ns_iterations", w.ns_iterations);
  r.get("residual_tolerance", w.residual_tolerance);
  std::string mode = to_string(w.mode);
  r.get("mode", mode);
  w.mode = parse_whiten_mode(mode);
  r.finish();
}

void read_train(const json& j, const std::string& path, TrainConfig& t) {
  Reader r(j, path);
  r.get("epochs", t.epochs);
  r.get("base_lr", t.base_lr);
  r.get("final_lr", t.final_lr);
  r.get("warmup_epochs", t.warmup_epochs);
  r.get("p", t.p);
  r.get("k", t.k);
  r.get("weight_decay", t.weight_decay);
  r.get("seed", t.seed);
  std::string precision = to_string(t.precision);
  r.get("precision", precision);
  t.precision = parse_precision(precision);
  if (const json* a = r.child("augment")) {
    Reader ar(*a, r.child_path("augment"));
    ar.get("hflip", t.augment.hflip);
    ar.get("crop", t.augment.crop);
    ar.get("erase", t.augment.erase);
    ar.finish();
  }
  std::string variant = t.variant.label();
  r.get("variant", variant);
  t.variant = parse_variant(variant);
  r.get("placements", t.placements);
  r.get("widths", t.widths);
  r.get("stem_width", t.stem_width);
  r.get("margin", t.loss.margin);
  r.get("lambda_tri", t.loss.lambda_tri);
  r.get("in_epsilon", t.in_epsilon);
  if (const json* w = r.child("whiten")) read_whiten(*w, r.child_path("whiten"), t.whiten);
  r.get("reduction", t.reduction);
  r.get("sa_kernel", t.sa_kernel);
  r.finish();
}

void read_data(const json& j, const std::string& path, DataConfig& d) {
  Reader r(j, path);
  r.get("num_domains", d.num_domains);
  r.get("ids_per_domain", d.ids_per_domain);
  r.get("images_per_id", d.images_per_id);
  r.get("height", d.height);
  r.get("width", d.width);
  r.get("noise_std", d.noise_std);
  r.get("style_strength", d.style_strength);
  r.get("unseen_style_scale", d.unseen_style_scale);
  r.get("unseen_contrast", d.unseen_contrast);
  r.get("texture_amplitude", d.texture_amplitude);
  r.get("shared_identities", d.shared_identities);
  r.get("seed", d.seed);
  r.get("test_domain", d.test_domain);
  r.finish();
}

void read_eval(const json& j, const std::string& path, EvalConfig& e) {
  Reader r(j, path);
  r.get("splits", e.splits);
  r.get("query_fraction", e.query_fraction);
  r.get("seed", e.seed);
  r.finish();
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  Reader r(j, "");
  if (const json* t = r.child("train")) read_train(*t, "train", cfg.train);
  if (const json* d = r.child("data")) read_data(*d, "data", cfg.data);
  if (const json* e = r.child("eval")) read_eval(*e, "eval", cfg.eval);
  r.finish();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json train = {
      {"epochs", t.epochs},
      {"base_lr", t.base_lr},
      {"final_lr", t.final_lr},
      {"warmup_epochs", t.warmup_epochs},
      {"p", t.p},
      {"k", t.k},
      {"weight_decay", t.weight_decay},
      {"seed", t.seed},
      {"precision", to_string(t.precision)},
      {"augment", {{"hflip", t.augment.hflip}, {"crop", t.augment.crop}, {"erase", t.augment.erase}}},
      {"variant", t.variant.label()},
      {"placements", t.placements},
      {"widths", t.widths},
      {"stem_width", t.stem_width},
      {"margin", t.loss.margin},
      {"lambda_tri", t.loss.lambda_tri},
      {"in_epsilon", t.in_epsilon},
      {"whiten",
       {{"group_count", t.whiten.group_count},
        {"epsilon", t.whiten.epsilon},
        {"ns_iterations", t.whiten.ns_iterations},
        {"residual_tolerance", t.whiten.residual_tolerance},
        {"mode", to_string(t.whiten.mode)}}},
      {"reduction", t.reduction},
      {"sa_kernel", t.sa_kernel},
  };
  const DataConfig& d = cfg.data;
  json data = {{"num_domains", d.num_domains},
               {"ids_per_domain", d.ids_per_domain},
               {"images_per_id", d.images_per_id},
               {"height", d.height},
               {"width", d.width},
               {"noise_std", d.noise_std},
               {"style_strength", d.style_strength},
               {"unseen_style_scale", d.unseen_style_scale},
               {"unseen_contrast", d.unseen_contrast},
               {"texture_amplitude", d.texture_amplitude},
               {"shared_identities", d.shared_identities},
               {"seed", d.seed},
               {"test_domain", d.test_domain}};
  json eval = {{"splits", cfg.eval.splits}, {"query_fraction", cfg.eval.query_fraction}, {"seed", cfg.eval.seed}};
  return {{"train", train}, {"data", data}, {"eval", eval}};
}

ExperimentConfig load_experiment(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return experiment_from_json(j, base);
}

}  // namespace ams::harness
