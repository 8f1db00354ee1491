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

#include <map>
#include <span>
#include <string>

#include "ams/tensor.hpp"

namespace ams::harness {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled, scaled by the learning rate
};

struct AdamMoments {
  Tensor4 m;
  Tensor4 v;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  /// Updates every parameter that carries a gradient. Gradients are left in place.
  void step(std::span<const ParamRef> params, double lr);

  long steps() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }
  const std::map<std::string, AdamMoments>& moments() const { return state_; }

  /// Restores state saved from moments() and steps().
  void restore(long steps, std::map<std::string, AdamMoments> state);

 private:
  AdamConfig cfg_;
  long steps_ = 0;
  std::map<std::string, AdamMoments> state_;
};

}  // namespace ams::harness
