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

#include "ams/group_whiten.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ams/errors.hpp"

namespace ams {

std::string to_string(WhitenMode mode) {
  return mode == WhitenMode::newton_schulz ? "newton_schulz" : "eigen_exact";
}

WhitenMode parse_whiten_mode(const std::string& name) {
  if (name == "newton_schulz") return WhitenMode::newton_schulz;
  if (name == "eigen_exact") return WhitenMode::eigen_exact;
  throw ConfigError("unknown whitening mode '" + name + "' (expected newton_schulz or eigen_exact)");
}

void WhitenConfig::validate(std::size_t channels) const {
  if (group_count == 0 || channels % group_count != 0) {
    throw ConfigError("group count g=" + std::to_string(group_count) + " does not divide C=" +
                      std::to_string(channels));
  }
  if (!(epsilon > 0.0)) throw ConfigError("whitening epsilon must be positive");
  if (ns_iterations < 1) throw ConfigError("ns_iterations must be at least 1");
  if (!(residual_tolerance > 0.0)) throw ConfigError("residual_tolerance must be positive");
}

GroupView group_partition(const Tensor4& x, std::size_t groups) {
  const Shape4& s = x.shape();
  if (groups == 0 || s.c % groups != 0) {
    throw ConfigError("group count g=" + std::to_string(groups) + " does not divide C=" + std::to_string(s.c));
  }
  // Channels of one group are contiguous in (B, C, H, W) order, so the view
  // is the same buffer with new extents.
  const std::size_t per_group = s.c / groups;
  std::vector<double> values(x.values().begin(), x.values().end());
  return GroupView{s.b, groups, per_group * s.spatial(), std::move(values)};
}

Tensor4 group_merge(const GroupView& v, const Shape4& dims) {
  if (v.groups == 0 || dims.b != v.batch || dims.c % v.groups != 0 ||
      v.columns != (dims.c / v.groups) * dims.spatial() || v.data.size() != dims.size()) {
    throw ShapeError("group_merge: view (" + std::to_string(v.batch) + ", " + std::to_string(v.groups) + ", " +
                     std::to_string(v.columns) + ") is inconsistent with " + dims.str());
  }
  return Tensor4(dims, v.data);
}

double whitening_residual(const ConstRowMatrixMap& r, const ConstRowMatrixMap& s) {
  const RowMatrix prod = r * s * r;
  return (prod - RowMatrix::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff();
}

namespace {

struct NsTrace {
  double trace = 0.0;
  std::vector<RowMatrix> y;  // Y_0 .. Y_K
  std::vector<RowMatrix> z;  // Z_0 .. Z_K
  std::vector<RowMatrix> t;  // T_0 .. T_{K-1}
};

NsTrace run_newton_schulz(const ConstRowMatrixMap& a, int iterations) {
  const Eigen::Index n = a.rows();
  const RowMatrix eye = RowMatrix::Identity(n, n);
  NsTrace tr;
  tr.trace = a.trace();
  tr.y.reserve(iterations + 1);
  tr.z.reserve(iterations + 1);
  tr.t.reserve(iterations);
  tr.y.push_back(a / tr.trace);
  tr.z.push_back(eye);
  for (int k = 0; k < iterations; ++k) {
    RowMatrix t = 0.5 * (3.0 * eye - tr.z[k] * tr.y[k]);
    tr.y.push_back(tr.y[k] * t);
    tr.z.push_back(t * tr.z[k]);
    tr.t.push_back(std::move(t));
  }
  return tr;
}

void check_symmetric(const ConstRowMatrixMap& a, std::size_t b) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (!(asym < 1e-9 * scale)) {
    throw InputError("inverse_sqrt: slice " + std::to_string(b) + " is not symmetric (asymmetry " +
                     std::to_string(asym) + ")");
  }
}

}  // namespace

RowMatrix newton_schulz_backward(const ConstRowMatrixMap& a, const RowMatrix& dr, int iterations) {
  const NsTrace tr = run_newton_schulz(a, iterations);
  const Eigen::Index n = a.rows();
  const double s = tr.trace;
  const double root = std::sqrt(s);
  // R = Z_K / sqrt(s)
  RowMatrix dz = dr / root;
  RowMatrix dy = RowMatrix::Zero(n, n);
  double ds = -0.5 * (dr.cwiseProduct(tr.z.back())).sum() / (s * root);
  for (int k = iterations - 1; k >= 0; --k) {
    // Y_{k+1} = Y_k T_k,  Z_{k+1} = T_k Z_k,  T_k = 1.5 I - 0.5 Z_k Y_k
    const RowMatrix& t = tr.t[k];
    RowMatrix dt = tr.y[k].transpose() * dy + dz * tr.z[k].transpose();
    RowMatrix dy_prev = dy * t.transpose() - 0.5 * tr.z[k].transpose() * dt;
    RowMatrix dz_prev = t.transpose() * dz - 0.5 * dt * tr.y[k].transpose();
    dy = std::move(dy_prev);
    dz = std::move(dz_prev);
  }
  // Y_0 = A / s, s = tr(A)
  ds -= dy.cwiseProduct(a).sum() / (s * s);
  RowMatrix da = dy / s;
  da.diagonal().array() += ds;
  return da;
}

MatrixBatch inverse_sqrt(const MatrixBatch& s, const WhitenConfig& cfg) {
  MatrixBatch out(s.batch(), s.n());
  const Eigen::Index n = static_cast<Eigen::Index>(s.n());
  for (std::size_t b = 0; b < s.batch(); ++b) {
    const ConstRowMatrixMap a = s.slice(b);
    if (!a.allFinite()) throw NumericalError("inverse_sqrt", "non-finite covariance entry in slice " + std::to_string(b));
    check_symmetric(a, b);
    RowMatrixMap r = out.slice(b);
    if (cfg.mode == WhitenMode::eigen_exact) {
      const RowMatrix sym = 0.5 * (a + a.transpose());
      Eigen::SelfAdjointEigenSolver<RowMatrix> eig(sym);
      if (eig.info() != Eigen::Success) throw NumericalError("inverse_sqrt", "eigendecomposition failed");
      const Eigen::VectorXd& lambda = eig.eigenvalues();
      if (!(lambda.minCoeff() > 0.0)) {
        throw NumericalError("inverse_sqrt", "matrix is not positive definite (min eigenvalue " +
                                                 std::to_string(lambda.minCoeff()) + ")");
      }
      const RowMatrix& v = eig.eigenvectors();
      r = v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    } else {
      if (!(a.trace() > 0.0)) throw NumericalError("inverse_sqrt", "non-positive trace");
      const NsTrace tr = run_newton_schulz(a, cfg.ns_iterations);
      r = tr.z.back() / std::sqrt(tr.trace);
    }
    if (!r.allFinite()) throw NumericalError("inverse_sqrt", "non-finite result in slice " + std::to_string(b));
    const double residual = whitening_residual(ConstRowMatrixMap(r.data(), n, n), a);
    if (!(residual <= cfg.residual_tolerance)) {
      throw NumericalError("inverse_sqrt",
                           "whitening residual " + std::to_string(residual) + " exceeds tolerance " +
                               std::to_string(cfg.residual_tolerance) + " in slice " + std::to_string(b),
                           residual);
    }
  }
  return out;
}

GroupWhitenResult group_whiten(const Tensor4& x, const WhitenConfig& cfg) {
  const Shape4& shape = x.shape();
  cfg.validate(shape.c);
  GroupView view = group_partition(x, cfg.group_count);
  const std::size_t g = view.groups;
  const std::size_t m = view.columns;
  if (m < 2) throw ShapeError("group_whiten: each group needs at least two columns, got " + std::to_string(m));

  WhitenStats st{shape.b, g, m, std::vector<double>(shape.b * g), MatrixBatch(shape.b, g), MatrixBatch()};
  for (std::size_t b = 0; b < shape.b; ++b) {
    RowMatrixMap rows = view.sample(b);
    const Eigen::VectorXd mu = rows.rowwise().mean();
    for (std::size_t j = 0; j < g; ++j) st.mean[b * g + j] = mu(static_cast<Eigen::Index>(j));
    rows.colwise() -= mu;
    RowMatrixMap cov = st.covariance.slice(b);
    cov.noalias() = rows * rows.transpose() / static_cast<double>(m);
    // Exact symmetry regardless of GEMM summation order.
    cov = (0.5 * (cov + cov.transpose())).eval();
    cov.diagonal().array() += cfg.epsilon;
  }
  st.inv_sqrt = inverse_sqrt(st.covariance, cfg);
  for (std::size_t b = 0; b < shape.b; ++b) {
    RowMatrixMap rows = view.sample(b);
    const RowMatrix white = st.inv_sqrt.slice(b) * rows;
    rows = white;
  }
  return GroupWhitenResult{group_merge(view, shape), std::move(st)};
}

Tensor4 group_whiten_backward(const Tensor4& x, const WhitenConfig& cfg, const WhitenStats& stats,
                              const Tensor4& dy) {
  const Shape4& shape = x.shape();
  if (dy.shape() != shape) throw ShapeError("group_whiten_backward: gradient shape mismatch");
  GroupView centred = group_partition(x, cfg.group_count);
  GroupView grad = group_partition(dy, cfg.group_count);
  const std::size_t g = centred.groups;
  const double m = static_cast<double>(centred.columns);
  for (std::size_t b = 0; b < shape.b; ++b) {
    RowMatrixMap xc = centred.sample(b);
    for (std::size_t j = 0; j < g; ++j) xc.row(static_cast<Eigen::Index>(j)).array() -= stats.mean[b * g + j];
    RowMatrixMap dout = grad.sample(b);
    const ConstRowMatrixMap r = stats.inv_sqrt.slice(b);
    const RowMatrix dr = dout * xc.transpose();
    RowMatrix dxc = r.transpose() * dout;
    const RowMatrix dcov = newton_schulz_backward(stats.covariance.slice(b), dr, cfg.ns_iterations);
    dxc.noalias() += (dcov + dcov.transpose()) * xc / m;
    const Eigen::VectorXd row_mean = dxc.rowwise().mean();
    dxc.colwise() -= row_mean;
    dout = dxc;
  }
  return group_merge(grad, shape);
}

}  // namespace ams
