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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "ams/errors.hpp"
#include "ams/harness/ablate.hpp"
#include "ams/harness/evaluate.hpp"
#include "ams/harness/model.hpp"
#include "ams/harness/synthetic.hpp"
#include "ams/harness/train.hpp"

namespace ams::harness {
namespace {

ExperimentConfig tiny() {
  ExperimentConfig cfg = ExperimentConfig::desk_scale();
  cfg.train.epochs = 3;
  cfg.train.warmup_epochs = 1;
  cfg.train.p = 4;
  cfg.train.k = 2;
  cfg.train.widths = {8, 8, 16, 16};
  cfg.train.stem_width = 8;
  cfg.train.whiten.group_count = 4;
  cfg.train.reduction = 2;
  cfg.data.ids_per_domain = 4;
  cfg.data.images_per_id = 4;
  cfg.eval.splits = 2;
  return cfg;
}

TEST(Model, ForwardShapesAndParameterNames) {
  auto cfg = tiny();
  cfg.train.variant = VariantKind::canonical();
  std::mt19937_64 rng(1);
  Model m(cfg.train, 5, rng);
  const auto out = m.forward(Tensor4(Shape4{3, 3, 16, 8}, 0.3));
  EXPECT_EQ(out.embedding.rows(), 3);
  EXPECT_EQ(out.embedding.cols(), 16);
  EXPECT_EQ(out.logits.cols(), 5);
  bool saw_ams = false, saw_head = false;
  for (const auto& p : m.parameters()) {
    saw_ams = saw_ams || p.name.rfind("ams1.", 0) == 0;
    saw_head = saw_head || p.name == "head.w";
  }
  EXPECT_TRUE(saw_ams);
  EXPECT_TRUE(saw_head);
}

TEST(Model, IndivisibleGroupCountSuggestsAlternative) {
  auto cfg = tiny();
  cfg.train.variant = VariantKind::canonical();
  cfg.train.whiten.group_count = 3;
  std::mt19937_64 rng(1);
  try {
    Model m(cfg.train, 4, rng);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("g=" + std::to_string(suggest_group_count(cfg.train.widths, 3))),
              std::string::npos)
        << e.what();
  }
}

TEST(Augment, FlipOnlyMirrorsRows) {
  std::mt19937_64 rng(2);
  Tensor4 x(Shape4{1, 1, 2, 3}, {1, 2, 3, 4, 5, 6});
  Augmentation flags{true, false, false};
  bool flipped = false, kept = false;
  for (int t = 0; t < 32; ++t) {
    const Tensor4 y = augment(x, flags, rng);
    if (y[0] == 3 && y[2] == 1 && y[3] == 6) flipped = true;
    else if (y[0] == 1 && y[5] == 6) kept = true;
    else FAIL() << "unexpected output";
  }
  EXPECT_TRUE(flipped);
  EXPECT_TRUE(kept);
}

TEST(Train, SameSeedGivesIdenticalWeights) {
  const auto cfg = tiny();
  const auto domains = generate_domains(cfg.data);
  const auto pool = pool_domains(leave_one_out(domains, cfg.data.test_domain).train);
  const auto a = train(cfg, pool), b = train(cfg, pool);
  ASSERT_EQ(a.checkpoint.tensors.size(), b.checkpoint.tensors.size());
  for (std::size_t t = 0; t < a.checkpoint.tensors.size(); ++t) {
    const Tensor4& x = a.checkpoint.tensors[t].value;
    const Tensor4& y = b.checkpoint.tensors[t].value;
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(x[i], y[i]) << a.checkpoint.tensors[t].name;
  }
  EXPECT_EQ(a.log.size(), 3u);
}

TEST(Train, TwoIdentityToyBeatsChance) {
  auto cfg = tiny();
  cfg.data.num_domains = 2;
  cfg.data.test_domain = 1;
  cfg.data.ids_per_domain = 2;
  cfg.data.images_per_id = 8;
  cfg.train.p = 2;
  cfg.train.k = 4;
  cfg.train.epochs = 40;
  cfg.train.warmup_epochs = 2;
  const auto domains = generate_domains(cfg.data);
  const auto pool = pool_domains(leave_one_out(domains, 1).train);
  const auto r = train(cfg, pool);
  EXPECT_LT(r.log.back().cls, std::log(2.0));
}

TEST(Train, GroupWhitenedModelStaysFinite) {
  auto cfg = tiny();
  cfg.train.widths = ExperimentConfig::desk_scale().train.widths;
  cfg.train.stem_width = 32;
  cfg.train.variant = VariantKind::plain(Combination::in_gw);
  cfg.train.whiten.group_count = 8;
  const auto domains = generate_domains(cfg.data);
  const auto pool = pool_domains(leave_one_out(domains, cfg.data.test_domain).train);
  const auto r = train(cfg, pool);
  for (const auto& e : r.log) EXPECT_TRUE(std::isfinite(e.total));
  for (const auto& t : r.checkpoint.tensors) EXPECT_TRUE(t.value.all_finite()) << t.name;
}

// 16 channels over 8 pixels leaves 16 columns per 8x8 covariance.
TEST(Train, WhiteningFailureReportsStageAndStep) {
  auto cfg = tiny();
  cfg.train.variant = VariantKind::plain(Combination::in_gw);
  cfg.train.whiten.group_count = 8;
  const auto domains = generate_domains(cfg.data);
  const auto pool = pool_domains(leave_one_out(domains, cfg.data.test_domain).train);
  try {
    train(cfg, pool);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_EQ(e.stage().rfind("stage3.AMS.GW", 0), 0u) << e.stage();
    EXPECT_GE(e.step(), 1);
    EXPECT_TRUE(e.residual().has_value());
    const std::string what = e.what();
    EXPECT_EQ(what.find(e.stage()), what.rfind(e.stage())) << what;
  }
}

TEST(Train, CheckpointRestoresTheSameEmbeddings) {
  const auto cfg = tiny();
  const auto domains = generate_domains(cfg.data);
  const auto pool = pool_domains(leave_one_out(domains, cfg.data.test_domain).train);
  const auto r = train(cfg, pool);
  Model a = restore_model(r.checkpoint);
  Model b = restore_model(r.checkpoint);
  const RowMatrix ea = a.embed(domains[3].images), eb = b.embed(domains[3].images, 5);
  EXPECT_EQ((ea - eb).cwiseAbs().maxCoeff(), 0.0);
  ASSERT_NE(r.checkpoint.find("adam.m/head.w"), nullptr);
}

TEST(Evaluate, PerfectEmbeddingsScoreOne) {
  std::vector<int> ids;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) ids.push_back(i);
  RowMatrix e = RowMatrix::Zero(static_cast<Eigen::Index>(ids.size()), 6);
  for (std::size_t n = 0; n < ids.size(); ++n) e(static_cast<Eigen::Index>(n), ids[n]) = 1.0;
  const auto r = evaluate_embeddings(e, ids, EvalConfig{});
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_DOUBLE_EQ(r.rank1, 1.0);
  EXPECT_EQ(r.split_map.size(), 10u);
}

TEST(Evaluate, SplitsKeepEveryIdentityOnBothSides) {
  std::vector<int> ids;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) ids.push_back(i);
  for (const auto& s : make_splits(ids, EvalConfig{})) {
    std::set<int> q, g;
    for (auto i : s.query) q.insert(ids[i]);
    for (auto i : s.gallery) g.insert(ids[i]);
    EXPECT_EQ(q.size(), 5u);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_EQ(s.query.size() + s.gallery.size(), ids.size());
  }
}

TEST(Evaluate, RandomEmbeddingsMatchRandomRankingBaseline) {
  std::vector<int> ids;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 4; ++j) ids.push_back(i);
  const EvalConfig cfg;
  const auto baseline = random_ranking_baseline(ids, cfg);
  double total = 0.0;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    RowMatrix e(static_cast<Eigen::Index>(ids.size()), 8);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = n01(rng);
    total += evaluate_embeddings(e, ids, cfg).map;
  }
  EXPECT_GT(baseline.sd, 0.0);
  EXPECT_NEAR(total / 20.0, baseline.mean, 3.0 * baseline.sd / std::sqrt(20.0));
}

TEST(Evaluate, TrainingDomainScoresAboveUnseen) {
  auto cfg = ExperimentConfig::desk_scale();
  cfg.train.epochs = 12;
  const auto domains = generate_domains(cfg.data);
  const auto r = run_experiment(cfg, domains);
  const auto seen = evaluate(r.trained.checkpoint, domains[0], cfg.eval);
  EXPECT_GT(seen.map, r.unseen.map);
  const auto chance = random_ranking_baseline(domains[3].ids, cfg.eval);
  EXPECT_GT(r.unseen.map, chance.mean + 5.0 * chance.sd);
}

TEST(Ablate, DuplicatesWarnAndFailuresAreRecorded) {
  auto cfg = tiny();
  cfg.train.epochs = 1;
  cfg.train.warmup_epochs = 0;
  const auto table = ablate({VariantKind::plain(Combination::none), VariantKind::plain(Combination::none),
                             VariantKind::plain(Combination::in_gw)},
                            cfg, {0, 1, 2});
  ASSERT_EQ(table.warnings.size(), 1u);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].completed, 3u);
  EXPECT_TRUE(table.rows[0].map_sd.has_value());

  const auto sweep = group_sweep(VariantKind::plain(Combination::in_gw), {4, 3}, cfg, {0, 1, 2});
  ASSERT_EQ(sweep.rows.size(), 2u);
  EXPECT_EQ(sweep.rows[0].completed, 3u);
  EXPECT_EQ(sweep.rows[1].completed, 0u);
  EXPECT_EQ(sweep.rows[1].failures.size(), 3u);
  EXPECT_FALSE(sweep.rows[1].map_mean.has_value());
  const std::string csv = to_csv(sweep);
  EXPECT_NE(csv.find("IN_GW,3,3,0,,,,,"), std::string::npos) << csv;
  EXPECT_TRUE(to_json(sweep)["rows"][1]["map_mean"].is_null());
}

TEST(Ablate, NeedsThreeSeeds) {
  EXPECT_THROW(ablate({VariantKind::canonical()}, tiny(), {0, 1}), ConfigError);
}

TEST(Ablate, MetricsJsonOmitsTimings) {
  auto cfg = tiny();
  cfg.train.epochs = 1;
  cfg.train.warmup_epochs = 0;
  const auto r = run_experiment(cfg);
  const auto j = metrics_json(cfg, r);
  EXPECT_TRUE(j.contains("unseen"));
  EXPECT_EQ(j.dump().find("seconds"), std::string::npos);
}

}  // namespace
}  // namespace ams::harness
