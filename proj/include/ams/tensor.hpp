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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ams {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixMap = Eigen::Map<RowMatrix>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

/// Extents of a rank-4 tensor in (batch, channels, height, width) order.
struct Shape4 {
  std::size_t b = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return b * c * h * w; }
  std::size_t spatial() const { return h * w; }
  bool operator==(const Shape4&) const = default;
  std::string str() const;
};

/// Dense rank-4 array stored row-major in (B, C, H, W) order, with an
/// optional gradient buffer of identical shape.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, double fill = 0.0);
  Tensor4(Shape4 shape, std::vector<double> values);

  const Shape4& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::size_t offset(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
    return ((b * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  double& at(std::size_t b, std::size_t c, std::size_t h, std::size_t w) {
    return data_[offset(b, c, h, w)];
  }
  double at(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[offset(b, c, h, w)];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  bool has_grad() const { return grad_.has_value(); }
  // Allocates a zeroed gradient buffer on first use.
  std::span<double> grad();
  std::span<const double> grad() const;
  void zero_grad();
  void drop_grad() { grad_.reset(); }
  // Moves the gradient buffer out as a tensor of the same shape.
  Tensor4 take_grad();

  bool all_finite() const;
  Tensor4 clone_values() const { return Tensor4(shape_, data_); }

 private:
  Shape4 shape_;
  std::vector<double> data_;
  std::optional<std::vector<double>> grad_;
};

/// A batch of square matrices, (batch, n, n), row-major per slice.
class MatrixBatch {
 public:
  MatrixBatch() = default;
  MatrixBatch(std::size_t batch, std::size_t n) : batch_(batch), n_(n), data_(batch * n * n, 0.0) {}

  std::size_t batch() const { return batch_; }
  std::size_t n() const { return n_; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  RowMatrixMap slice(std::size_t b) { return RowMatrixMap(data_.data() + b * n_ * n_, n_, n_); }
  ConstRowMatrixMap slice(std::size_t b) const {
    return ConstRowMatrixMap(data_.data() + b * n_ * n_, n_, n_);
  }

 private:
  std::size_t batch_ = 0;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Non-owning handle to a named trainable tensor.
struct ParamRef {
  std::string name;
  Tensor4* tensor = nullptr;
};

// dst += src elementwise; shapes must match.
void accumulate(Tensor4& dst, const Tensor4& src);

// Throws NumericalError naming `stage` when any value is NaN or infinite.
void require_finite(const Tensor4& t, const std::string& stage);

}  // namespace ams
