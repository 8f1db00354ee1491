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


#include "ams/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ams/harness/adam.hpp"
#include "ams/harness/sampler.hpp"
#include "ams/harness/schedule.hpp"
#include "ams/losses.hpp"

namespace ams::harness {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

Tensor4 gather(const Tensor4& images, const std::vector<std::size_t>& indices) {
  const Shape4& s = images.shape();
  const std::size_t per = s.c * s.spatial();
  Tensor4 out(Shape4{indices.size(), s.c, s.h, s.w});
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::copy(images.data() + indices[i] * per, images.data() + (indices[i] + 1) * per, out.data() + i * per);
  return out;
}

void round_to_float(Tensor4& t) {
  for (double& v : t.values()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace

TrainingAborted::TrainingAborted(const std::string& stage, int epoch, long step, const std::string& what,
                                 std::optional<double> residual)
    : NumericalError(stage, "epoch " + std::to_string(epoch) + ", step " + std::to_string(step) + ": " + what,
                     residual),
      epoch_(epoch),
      step_(step) {}

Tensor4 augment(const Tensor4& images, const Augmentation& flags, std::mt19937_64& rng) {
  Tensor4 out = images.clone_values();
  const Shape4& s = images.shape();
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> shift(-1, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto H = static_cast<long>(s.h), W = static_cast<long>(s.w);
  for (std::size_t n = 0; n < s.b; ++n) {
    const bool flip = flags.hflip && coin(rng);
    const bool crop = flags.crop && coin(rng);
    const int dy = crop ? shift(rng) : 0, dx = crop ? shift(rng) : 0;
    if (flip || crop) {
      for (std::size_t c = 0; c < s.c; ++c)
        for (long h = 0; h < H; ++h)
          for (long w = 0; w < W; ++w) {
            long sw = flip ? W - 1 - w : w;
            const long sh = std::clamp(h + dy, 0L, H - 1);
            sw = std::clamp(sw + dx, 0L, W - 1);
            out.at(n, c, static_cast<std::size_t>(h), static_cast<std::size_t>(w)) =
                images.at(n, c, static_cast<std::size_t>(sh), static_cast<std::size_t>(sw));
          }
    }
    if (flags.erase && coin(rng)) {
      const double area = (0.02 + 0.23 * unit(rng)) * static_cast<double>(s.spatial());
      const double aspect = std::exp(std::log(0.3) + (std::log(3.3) - std::log(0.3)) * unit(rng));
      const long eh = std::clamp(static_cast<long>(std::round(std::sqrt(area * aspect))), 1L, H);
      const long ew = std::clamp(static_cast<long>(std::round(std::sqrt(area / aspect))), 1L, W);
      const long top = static_cast<long>(unit(rng) * static_cast<double>(H - eh + 1));
      const long left = static_cast<long>(unit(rng) * static_cast<double>(W - ew + 1));
      for (std::size_t c = 0; c < s.c; ++c)
        for (long h = top; h < top + eh; ++h)
          for (long w = left; w < left + ew; ++w)
            out.at(n, c, static_cast<std::size_t>(h), static_cast<std::size_t>(w)) = unit(rng);
    }
  }
  return out;
}

TrainResult train(const ExperimentConfig& cfg, const TrainingPool& pool) {
  cfg.validate();
  const TrainConfig& tc = cfg.train;
  auto init_rng = stream(tc.seed, 1);
  auto sample_rng = stream(tc.seed, 2);
  auto augment_rng = stream(tc.seed, 3);

  Model model(tc, pool.num_classes, init_rng);
  TrainResult result;
  result.warnings = model.warnings();
  const auto params = model.parameters();
  if (tc.precision == Precision::f32)
    for (const ParamRef& p : params) round_to_float(*p.tensor);
  Adam adam(AdamConfig{0.9, 0.999, 1e-8, tc.weight_decay});

  long step = 0;
  bool warned_replacement = false;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = lr_at(epoch, tc);
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    for (const PkBatch& batch : pk_epoch(pool.labels, tc.p, tc.k, sample_rng)) {
      ++step;
      if (batch.with_replacement && !warned_replacement) {
        result.warnings.push_back("some identities have fewer than K images; sampled with replacement");
        warned_replacement = true;
      }
      Tensor4 images = augment(gather(pool.images, batch.indices), tc.augment, augment_rng);
      if (tc.precision == Precision::f32) round_to_float(images);
      model.zero_grad();
      ModelOutput out;
      LossResult ce, tri;
      try {
        out = model.forward(images);
        if (!out.embedding.allFinite()) throw NumericalError("embedding", "non-finite embedding");
        ce = softmax_cross_entropy(out.logits, batch.labels);
        tri = batch_hard_triplet(out.embedding, batch.labels, tc.loss);
      } catch (const NumericalError& e) {
        throw TrainingAborted(e.stage(), epoch, step, e.detail(), e.residual());
      } catch (const InputError& e) {
        // Non-finite logits surface as input errors from the loss.
        throw TrainingAborted("loss", epoch, step, e.what());
      }
      const double total = total_loss(ce.value, tri.value, tc.loss);
      if (!std::isfinite(total)) throw TrainingAborted("loss", epoch, step, "non-finite total loss");

      try {
        model.backward(tri.grad * tc.loss.lambda_tri, ce.grad);
      } catch (const NumericalError& e) {
        throw TrainingAborted(e.stage(), epoch, step, e.detail(), e.residual());
      }
      for (const ParamRef& p : params) {
        if (!p.tensor->has_grad()) continue;
        for (double g : std::as_const(*p.tensor).grad()) {
          if (!std::isfinite(g)) throw TrainingAborted("gradient." + p.name, epoch, step, "non-finite gradient");
        }
      }
      adam.step(params, lr);
      if (tc.precision == Precision::f32)
        for (const ParamRef& p : params) round_to_float(*p.tensor);

      log.total += total;
      log.cls += ce.value;
      log.tri += tri.value;
      ++log.steps;
    }
    if (log.steps > 0) {
      const double n = static_cast<double>(log.steps);
      log.total /= n;
      log.cls /= n;
      log.tri /= n;
    }
    result.log.push_back(log);
  }

  Checkpoint& ckpt = result.checkpoint;
  ckpt.config = to_json(cfg);
  ckpt.epoch = tc.epochs;
  ckpt.precision = tc.precision;
  ckpt.optimizer_steps = adam.steps();
  for (const ParamRef& p : params) ckpt.tensors.push_back({p.name, p.tensor->clone_values()});
  for (const auto& [name, m] : adam.moments()) {
    ckpt.tensors.push_back({"adam.m/" + name, m.m.clone_values()});
    ckpt.tensors.push_back({"adam.v/" + name, m.v.clone_values()});
  }
  return result;
}

Model restore_model(const Checkpoint& ckpt) {
  const ExperimentConfig cfg = experiment_from_json(ckpt.config);
  const Tensor4* head = ckpt.find("head.w");
  if (!head) throw InputError("checkpoint has no head.w tensor");
  auto rng = stream(cfg.train.seed, 1);
  Model model(cfg.train, head->shape().b, rng);
  for (const ParamRef& p : model.parameters()) {
    const Tensor4* saved = ckpt.find(p.name);
    if (!saved) throw InputError("checkpoint is missing parameter '" + p.name + "'");
    if (saved->shape() != p.tensor->shape()) {
      throw InputError("checkpoint parameter '" + p.name + "' has shape " + saved->shape().str() + ", model expects " +
                       p.tensor->shape().str());
    }
    *p.tensor = saved->clone_values();
  }
  return model;
}

nlohmann::json to_json(const EpochLog& e) {
  return {{"epoch", e.epoch}, {"lr", e.lr}, {"total", e.total}, {"cls", e.cls}, {"tri", e.tri}, {"steps", e.steps}};
}

}  // namespace ams::harness
