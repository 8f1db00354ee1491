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

#include "ams/losses.hpp"

#include <cmath>
#include <map>

#include "ams/errors.hpp"

namespace ams {

void LossConfig::validate() const {
  if (!(margin >= 0.0)) throw ConfigError("triplet margin must be non-negative");
  if (!(lambda_tri >= 0.0)) throw ConfigError("lambda_tri must be non-negative");
}

LossResult softmax_cross_entropy(const RowMatrix& logits, std::span<const int> labels) {
  const Eigen::Index n = logits.rows(), classes = logits.cols();
  if (classes < 2) throw InputError("cross entropy needs at least two classes");
  if (static_cast<std::size_t>(n) != labels.size() || n == 0) {
    throw InputError("cross entropy: " + std::to_string(n) + " logit rows but " + std::to_string(labels.size()) +
                     " labels");
  }
  if (!logits.allFinite()) throw InputError("cross entropy: non-finite logits");
  LossResult r{0.0, RowMatrix(n, classes)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= classes) {
      throw InputError("cross entropy: label " + std::to_string(label) + " outside [0, " + std::to_string(classes) +
                       ")");
    }
    const double top = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c) sum += std::exp(logits(i, c) - top);
    const double log_z = top + std::log(sum);
    r.value += log_z - logits(i, label);
    for (Eigen::Index c = 0; c < classes; ++c) r.grad(i, c) = std::exp(logits(i, c) - log_z);
    r.grad(i, label) -= 1.0;
  }
  r.value /= static_cast<double>(n);
  r.grad /= static_cast<double>(n);
  return r;
}

double row_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double d = a(i, c) - b(j, c);
    acc += d * d;
  }
  return std::sqrt(acc);
}

LossResult batch_hard_triplet(const RowMatrix& f, std::span<const int> ids, const LossConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = f.rows();
  if (static_cast<std::size_t>(n) != ids.size()) throw InputError("triplet: feature rows and ids differ in length");
  std::map<int, int> counts;
  for (int id : ids) ++counts[id];
  for (const auto& [id, count] : counts) {
    if (count < 2) throw InputError("triplet: identity " + std::to_string(id) + " has a single sample in the batch");
  }
  if (counts.size() < 2) throw InputError("triplet: batch needs at least two identities");

  LossResult r{0.0, RowMatrix::Zero(n, f.cols())};
  auto add_distance_grad = [&](Eigen::Index a, Eigen::Index b, double dist, double sign) {
    if (dist <= 0.0) return;
    const Eigen::RowVectorXd unit = (f.row(a) - f.row(b)) / dist;
    r.grad.row(a) += sign * unit;
    r.grad.row(b) -= sign * unit;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    double dp = -1.0, dn = 0.0;
    Eigen::Index p = -1, q = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = row_distance(f, i, f, j);
      if (ids[static_cast<std::size_t>(j)] == ids[static_cast<std::size_t>(i)]) {
        if (d > dp) {
          dp = d;
          p = j;
        }
      } else if (q < 0 || d < dn) {
        dn = d;
        q = j;
      }
    }
    const double term = dp - dn + cfg.margin;
    if (term > 0.0) {
      r.value += term;
      add_distance_grad(i, p, dp, 1.0);
      add_distance_grad(i, q, dn, -1.0);
    }
  }
  return r;
}

double total_loss(double cls, double tri, const LossConfig& cfg) { return cls + cfg.lambda_tri * tri; }

}  // namespace ams
