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

#include "ams/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "ams/errors.hpp"

namespace ams {

double grad_check(const ScalarObjective& f, const Tensor4& x, double step) {
  Tensor4 analytic(x.shape());
  const double f0 = f(x, &analytic);
  if (!std::isfinite(f0) || !analytic.all_finite()) {
    throw NumericalError("grad_check", "non-finite objective or analytic gradient");
  }
  Tensor4 probe = x.clone_values();
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double fp = f(probe, nullptr);
    probe[i] = orig - step;
    const double fm = f(probe, nullptr);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("grad_check", "non-finite objective at coordinate " + std::to_string(i));
    }
    const double numeric = (fp - fm) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric)));
  }
  return worst;
}

double weighted_sum(const Tensor4& y, const Tensor4& weights) {
  if (y.shape() != weights.shape()) throw ShapeError("weighted_sum: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * weights[i];
  return acc;
}

}  // namespace ams
