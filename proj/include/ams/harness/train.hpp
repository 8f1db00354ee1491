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

#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "ams/errors.hpp"
#include "ams/harness/checkpoint.hpp"
#include "ams/harness/config.hpp"
#include "ams/harness/model.hpp"
#include "ams/harness/synthetic.hpp"

namespace ams::harness {

/// A loss, gradient or activation went non-finite (or whitening failed to
/// converge) during training. stage() names where, epoch() and step() when.
class TrainingAborted : public NumericalError {
 public:
  TrainingAborted(const std::string& stage, int epoch, long step, const std::string& what,
                  std::optional<double> residual = std::nullopt);
  int epoch() const noexcept { return epoch_; }
  long step() const noexcept { return step_; }

 private:
  int epoch_;
  long step_;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0;
  double cls = 0.0;
  double tri = 0.0;
  std::size_t steps = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
  std::vector<std::string> warnings;
};

/// Horizontal flip, +-1 pixel crop jitter with edge replication and random
/// erasing, each applied per image with probability 1/2 when enabled.
Tensor4 augment(const Tensor4& images, const Augmentation& flags, std::mt19937_64& rng);

TrainResult train(const ExperimentConfig& cfg, const TrainingPool& pool);

/// Rebuilds the model described by a checkpoint and loads its parameters.
Model restore_model(const Checkpoint& ckpt);

nlohmann::json to_json(const EpochLog& e);

}  // namespace ams::harness
