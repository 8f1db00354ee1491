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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "ams/errors.hpp"
#include "ams/harness/config.hpp"
#include "ams/harness/sampler.hpp"
#include "ams/harness/synthetic.hpp"

namespace ams::harness {
namespace {

TEST(Config, DeskScaleValidates) { EXPECT_NO_THROW(ExperimentConfig::desk_scale().validate()); }

TEST(Config, FullBatchNeedsEnoughImagesPerIdentity) {
  try {
    ExperimentConfig{}.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("K=16"), std::string::npos) << e.what();
  }
  ExperimentConfig full;
  full.data.images_per_id = 16;
  EXPECT_NO_THROW(full.validate());
}

TEST(Config, JsonOverridesOnlyNamedFields) {
  const auto base = ExperimentConfig::desk_scale();
  const auto cfg = experiment_from_json(nlohmann::json::parse(R"({"train": {"epochs": 7}, "data": {"seed": 9}})"), base);
  EXPECT_EQ(cfg.train.epochs, 7);
  EXPECT_EQ(cfg.data.seed, 9u);
  EXPECT_EQ(cfg.train.k, base.train.k);
  EXPECT_EQ(cfg.train.base_lr, base.train.base_lr);
}

TEST(Config, RoundTripsThroughJson) {
  auto cfg = ExperimentConfig::desk_scale();
  cfg.train.variant = VariantKind::canonical();
  cfg.train.whiten.group_count = 8;
  cfg.data.unseen_style_scale = 1.5;
  const auto back = experiment_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
}

TEST(Config, UnknownKeyIsRejectedWithPath) {
  try {
    experiment_from_json(nlohmann::json::parse(R"({"train": {"epoch": 3}})"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.epoch"), std::string::npos) << e.what();
  }
}

TEST(Config, InvalidValuesAreRejected) {
  auto cfg = ExperimentConfig::desk_scale();
  cfg.data.test_domain = cfg.data.num_domains;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::desk_scale();
  cfg.train.k = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

SyntheticDomainSpec sample_style(double noise) {
  SyntheticDomainSpec spec;
  spec.illumination = 1.3;
  spec.contrast = 0.7;
  spec.color_gain = {0.8, 1.2, 1.5};
  spec.color_offset = {0.1, -0.2, 0.05};
  spec.texture_seed = 5;
  spec.texture_amplitude = 0.15;
  spec.noise_std = noise;
  return spec;
}

// On the figure a style is the affine map gain * (contrast * (x - 0.5) + 0.5) + offset.
TEST(Synthetic, FigurePixelsFollowTheStyleMap) {
  const auto spec = sample_style(0.0);
  for (std::uint64_t key : {1u, 2u, 3u}) {
    const auto proto = make_prototype(key, 16, 8);
    const Tensor4 img = render(proto, spec);
    const std::size_t hw = proto.image.shape().spatial();
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < hw; ++i) {
        if (proto.mask[i] <= 0.0) continue;
        const double x = proto.image[c * hw + i];
        const double expected = spec.color_gain[c] * spec.illumination * (spec.contrast * (x - 0.5) + 0.5) +
                                spec.color_offset[c];
        ASSERT_NEAR(img[c * hw + i], expected, 1e-12);
      }
  }
}

TEST(Synthetic, NoiseHasRequestedSpread) {
  const auto proto = make_prototype(7, 64, 32);
  const Tensor4 clean = render(proto, sample_style(0.0), ImageJitter{0, 0, 1.0, 11});
  const Tensor4 noisy = render(proto, sample_style(0.02), ImageJitter{0, 0, 1.0, 11});
  double ss = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) ss += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(clean.size())), 0.02, 0.002);
}

TEST(Synthetic, PrototypesDifferAcrossKeys) {
  const auto a = make_prototype(1, 16, 8), b = make_prototype(2, 16, 8);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.image.size(); ++i) diff += std::abs(a.image[i] - b.image[i]);
  EXPECT_GT(diff, 1.0);
}

TEST(Synthetic, DomainsHaveExpectedCountsAndDisjointIdentities) {
  auto cfg = ExperimentConfig::desk_scale().data;
  cfg.ids_per_domain = 5;
  cfg.images_per_id = 3;
  const auto domains = generate_domains(cfg);
  ASSERT_EQ(domains.size(), cfg.num_domains);
  std::set<std::uint64_t> keys;
  std::size_t total = 0;
  for (const auto& d : domains) {
    EXPECT_EQ(d.size(), 15u);
    EXPECT_EQ(d.num_ids, 5u);
    EXPECT_EQ(d.images.shape(), (Shape4{15, 3, cfg.height, cfg.width}));
    std::set<std::uint64_t> own(d.prototype.begin(), d.prototype.end());
    EXPECT_EQ(own.size(), 5u);
    keys.insert(own.begin(), own.end());
    total += own.size();
  }
  EXPECT_EQ(keys.size(), total);
}

TEST(Synthetic, SharedIdentitiesReuseKeys) {
  auto cfg = ExperimentConfig::desk_scale().data;
  cfg.ids_per_domain = 4;
  cfg.images_per_id = 2;
  cfg.shared_identities = true;
  const auto domains = generate_domains(cfg);
  std::set<std::uint64_t> a(domains[0].prototype.begin(), domains[0].prototype.end());
  std::set<std::uint64_t> b(domains[1].prototype.begin(), domains[1].prototype.end());
  EXPECT_EQ(a, b);
}

TEST(Synthetic, GenerationIsDeterministic) {
  auto cfg = ExperimentConfig::desk_scale().data;
  cfg.ids_per_domain = 3;
  cfg.images_per_id = 2;
  const auto a = generate_domains(cfg), b = generate_domains(cfg);
  for (std::size_t d = 0; d < a.size(); ++d)
    for (std::size_t i = 0; i < a[d].images.size(); ++i) ASSERT_EQ(a[d].images[i], b[d].images[i]);
}

TEST(Synthetic, UnseenStyleScaleOnlyMovesTestDomain) {
  auto cfg = ExperimentConfig::desk_scale().data;
  const auto plain = default_domain_specs(cfg);
  cfg.unseen_style_scale = 2.0;
  const auto wide = default_domain_specs(cfg);
  for (std::size_t k = 0; k < plain.size(); ++k) {
    if (k == cfg.test_domain) {
      EXPECT_NEAR(std::log(wide[k].illumination), 2.0 * std::log(plain[k].illumination), 1e-12);
    } else {
      EXPECT_TRUE(wide[k].same_style(plain[k]));
    }
  }
}

TEST(Synthetic, IdenticalStylesAreRejected) {
  auto cfg = ExperimentConfig::desk_scale().data;
  cfg.ids_per_domain = 2;
  std::vector<SyntheticDomainSpec> specs;
  for (std::size_t k = 0; k < cfg.num_domains; ++k) specs.push_back(SyntheticDomainSpec::identity_style(k));
  EXPECT_THROW(generate_domains(cfg, specs), ConfigError);
}

TEST(Synthetic, LeaveOneOutPoolsTrainingDomains) {
  auto cfg = ExperimentConfig::desk_scale().data;
  cfg.ids_per_domain = 3;
  cfg.images_per_id = 2;
  const auto domains = generate_domains(cfg);
  const auto split = leave_one_out(domains, 1);
  ASSERT_EQ(split.train.size(), 3u);
  EXPECT_EQ(split.test->domain(), 1u);
  const auto pool = pool_domains(split.train);
  EXPECT_EQ(pool.num_classes, 9u);
  EXPECT_EQ(pool.labels.size(), 18u);
  EXPECT_EQ(std::count(pool.domain.begin(), pool.domain.end(), 1u), 0);
  EXPECT_EQ(*std::max_element(pool.labels.begin(), pool.labels.end()), 8);
}

std::vector<int> labels_with_counts(const std::vector<int>& counts) {
  std::vector<int> labels;
  for (std::size_t id = 0; id < counts.size(); ++id) labels.insert(labels.end(), counts[id], static_cast<int>(id));
  return labels;
}

TEST(Sampler, BatchHasPIdentitiesTimesK) {
  const auto labels = labels_with_counts({6, 6, 6, 6, 6});
  std::mt19937_64 rng(3);
  const PkBatch batch = pk_sample(labels, 3, 4, rng);
  ASSERT_EQ(batch.indices.size(), 12u);
  std::map<int, int> counts;
  for (std::size_t i = 0; i < batch.indices.size(); ++i) {
    EXPECT_EQ(labels[batch.indices[i]], batch.labels[i]);
    ++counts[batch.labels[i]];
  }
  EXPECT_EQ(counts.size(), 3u);
  for (auto [id, n] : counts) EXPECT_EQ(n, 4) << id;
  std::set<std::size_t> unique(batch.indices.begin(), batch.indices.end());
  EXPECT_EQ(unique.size(), 12u);
  EXPECT_FALSE(batch.with_replacement);
}

TEST(Sampler, ShortIdentityFallsBackToReplacement) {
  const auto labels = labels_with_counts({2, 2});
  std::mt19937_64 rng(4);
  const PkBatch batch = pk_sample(labels, 2, 3, rng);
  EXPECT_EQ(batch.indices.size(), 6u);
  EXPECT_TRUE(batch.with_replacement);
}

TEST(Sampler, TooFewIdentitiesThrows) {
  const auto labels = labels_with_counts({4, 4});
  std::mt19937_64 rng(5);
  EXPECT_THROW(pk_sample(labels, 3, 2, rng), InputError);
}

TEST(Sampler, EpochCoversIdentitiesOnce) {
  const auto labels = labels_with_counts({4, 4, 4, 4, 4, 4, 4});
  std::mt19937_64 rng(6);
  const auto epoch = pk_epoch(labels, 3, 2, rng);
  ASSERT_EQ(epoch.size(), 2u);  // 7 identities, tail of one dropped
  std::set<int> seen;
  for (const auto& b : epoch)
    for (int id : b.labels) seen.insert(id);
  EXPECT_EQ(seen.size(), 6u);
}

TEST(Sampler, SameSeedSameBatches) {
  const auto labels = labels_with_counts({5, 5, 5, 5, 5, 5});
  std::mt19937_64 a(8), b(8);
  const auto ea = pk_epoch(labels, 2, 3, a), eb = pk_epoch(labels, 2, 3, b);
  ASSERT_EQ(ea.size(), eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) EXPECT_EQ(ea[i].indices, eb[i].indices);
}

}  // namespace
}  // namespace ams::harness
