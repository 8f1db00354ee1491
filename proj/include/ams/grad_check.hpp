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

#include <functional>

#include "ams/tensor.hpp"

namespace ams {

/// Scalar objective. When `grad` is non-null the callee writes the analytic
/// gradient with respect to `x` into it (same shape as `x`).
using ScalarObjective = std::function<double(const Tensor4& x, Tensor4* grad)>;

/// Compares the analytic gradient of `f` at `x` against central differences
/// and returns max_i |analytic_i - numeric_i| / max(1, |numeric_i|).
/// Throws NumericalError if any evaluation is non-finite.
double grad_check(const ScalarObjective& f, const Tensor4& x, double step = 1e-5);

/// Convenience objective: the weighted sum <w, y> of an output tensor, so
/// that d(objective)/dy = w. Used to probe backward passes with random
/// upstream gradients.
double weighted_sum(const Tensor4& y, const Tensor4& weights);

}  // namespace ams
