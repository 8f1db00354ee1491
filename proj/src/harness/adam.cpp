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


#include "ams/harness/adam.hpp"

#include <cmath>
#include <utility>

#include "ams/errors.hpp"

namespace ams::harness {

void Adam::step(std::span<const ParamRef> params, double lr) {
  ++steps_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (const ParamRef& ref : params) {
    Tensor4& p = *ref.tensor;
    if (!p.has_grad()) continue;
    const std::span<const double> g = std::as_const(p).grad();
    auto [it, fresh] = state_.try_emplace(ref.name);
    if (fresh) it->second = AdamMoments{Tensor4(p.shape()), Tensor4(p.shape())};
    AdamMoments& s = it->second;
    if (s.m.shape() != p.shape()) throw ShapeError("Adam: parameter '" + ref.name + "' changed shape");
    for (std::size_t i = 0; i < p.size(); ++i) {
      s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g[i];
      s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = s.m[i] / c1, vhat = s.v[i] / c2;
      p[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.epsilon) + cfg_.weight_decay * p[i]);
    }
  }
}

void Adam::restore(long steps, std::map<std::string, AdamMoments> state) {
  steps_ = steps;
  state_ = std::move(state);
}

}  // namespace ams::harness
