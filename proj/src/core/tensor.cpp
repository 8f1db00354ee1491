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

#include "ams/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "ams/errors.hpp"

namespace ams {

std::string Shape4::str() const {
  return "(" + std::to_string(b) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
         std::to_string(w) + ")";
}

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor4::Tensor4(Shape4 shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("tensor of shape " + shape_.str() + " needs " + std::to_string(shape_.size()) +
                     " values, got " + std::to_string(data_.size()));
  }
}

std::span<double> Tensor4::grad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0);
  return *grad_;
}

std::span<const double> Tensor4::grad() const {
  if (!grad_) throw Error("tensor has no gradient buffer");
  return *grad_;
}

void Tensor4::zero_grad() {
  if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

Tensor4 Tensor4::take_grad() {
  if (!grad_) return Tensor4(shape_);
  Tensor4 out(shape_, std::move(*grad_));
  grad_.reset();
  return out;
}

bool Tensor4::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void accumulate(Tensor4& dst, const Tensor4& src) {
  if (dst.shape() != src.shape()) throw ShapeError("accumulate: " + dst.shape().str() + " vs " + src.shape().str());
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

void require_finite(const Tensor4& t, const std::string& stage) {
  if (!t.all_finite()) throw NumericalError(stage, "non-finite value in output");
}

}  // namespace ams
