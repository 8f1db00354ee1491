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

#include <string>
#include <vector>

#include "ams/tensor.hpp"

namespace ams {

enum class WhitenMode { newton_schulz, eigen_exact };

std::string to_string(WhitenMode mode);
WhitenMode parse_whiten_mode(const std::string& name);

struct WhitenConfig {
  std::size_t group_count = 8;
  // Ridge added to the group covariance.
  double epsilon = 1e-3;
  int ns_iterations = 7;
  WhitenMode mode = WhitenMode::newton_schulz;
  // Largest accepted ||R S R - I||_max before the solve is reported as failed.
  double residual_tolerance = 5e-2;

  void validate(std::size_t channels) const;
};

/// Channels split into g contiguous groups, each flattened to c*H*W columns.
struct GroupView {
  std::size_t batch = 0;
  std::size_t groups = 0;
  std::size_t columns = 0;
  std::vector<double> data;

  RowMatrixMap sample(std::size_t b) {
    return RowMatrixMap(data.data() + b * groups * columns, static_cast<Eigen::Index>(groups),
                        static_cast<Eigen::Index>(columns));
  }
  ConstRowMatrixMap sample(std::size_t b) const {
    return ConstRowMatrixMap(data.data() + b * groups * columns, static_cast<Eigen::Index>(groups),
                             static_cast<Eigen::Index>(columns));
  }
};

/// (B, C, H, W) -> (B, g, c*H*W). Element (b, j, i) is
/// x[b, j*c + i / (H*W), (i % (H*W)) / W, i % W].
GroupView group_partition(const Tensor4& x, std::size_t groups);

/// Exact inverse of group_partition.
Tensor4 group_merge(const GroupView& v, const Shape4& dims);

/// Per-slice S^{-1/2} for symmetric positive definite slices.
MatrixBatch inverse_sqrt(const MatrixBatch& s, const WhitenConfig& cfg);

/// max |R S R - I| over one slice.
double whitening_residual(const ConstRowMatrixMap& r, const ConstRowMatrixMap& s);

/// Gradient of the Newton-Schulz inverse square root at `s` with respect to
/// its input, given the gradient `dr` with respect to the output.
RowMatrix newton_schulz_backward(const ConstRowMatrixMap& s, const RowMatrix& dr, int iterations);

struct WhitenStats {
  std::size_t batch = 0;
  std::size_t groups = 0;
  std::size_t columns = 0;
  std::vector<double> mean;   // (B, g)
  MatrixBatch covariance;     // ridge included
  MatrixBatch inv_sqrt;
};

struct GroupWhitenResult {
  Tensor4 output;
  WhitenStats stats;
};

/// Per sample: centre each group row, form the g x g covariance plus
/// epsilon * I, and multiply the centred rows by its inverse square root.
/// No learnable parameters and no state shared across samples.
GroupWhitenResult group_whiten(const Tensor4& x, const WhitenConfig& cfg);

/// dL/dx. Always differentiates the Newton-Schulz composition, also when the
/// forward pass used the exact eigen route.
Tensor4 group_whiten_backward(const Tensor4& x, const WhitenConfig& cfg, const WhitenStats& stats,
                              const Tensor4& dy);

}  // namespace ams
