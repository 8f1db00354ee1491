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


#include "ams/harness/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ams::harness {

double lr_at(int epoch, const TrainConfig& cfg) {
  const double base = cfg.base_lr, start = base / 100.0;
  if (epoch < cfg.warmup_epochs) {
    return start + (base - start) * static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs);
  }
  const int span = cfg.epochs - 1 - cfg.warmup_epochs;
  if (span <= 0) return cfg.final_lr;
  const double t = std::min(1.0, static_cast<double>(epoch - cfg.warmup_epochs) / static_cast<double>(span));
  return cfg.final_lr + 0.5 * (base - cfg.final_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace ams::harness
