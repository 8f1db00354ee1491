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


#include "ams/harness/self_check.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "ams/ams_block.hpp"
#include "ams/errors.hpp"
#include "ams/grad_check.hpp"
#include "ams/losses.hpp"
#include "ams/ops.hpp"
#include "ams/retrieval.hpp"

namespace ams::harness {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor4 uniform(Shape4 s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor4 t(s);
  for (double& v : t.values()) v = d(rng);
  return t;
}

RowMatrix gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

// Q diag(lambda) Q^T with eigenvalues spread geometrically over [1, cond].
RowMatrix spd(Eigen::Index n, double cond, std::mt19937_64& rng) {
  const RowMatrix q = Eigen::HouseholderQR<RowMatrix>(gaussian(n, n, rng)).householderQ();
  Eigen::VectorXd lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda(i) = n == 1 ? 1.0 : std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  const RowMatrix a = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

// Reference inverse square root by a direct eigendecomposition.
RowMatrix eig_inv_sqrt(const RowMatrix& a) {
  Eigen::SelfAdjointEigenSolver<RowMatrix> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// Per-(b, c) mean and biased standard deviation by plain loops.
void channel_moments(const Tensor4& x, std::vector<double>& mean, std::vector<double>& sd) {
  const Shape4& s = x.shape();
  mean.assign(s.b * s.c, 0.0);
  sd.assign(s.b * s.c, 0.0);
  for (std::size_t bc = 0; bc < s.b * s.c; ++bc) {
    const double* p = x.data() + bc * s.spatial();
    double m = 0.0;
    for (std::size_t i = 0; i < s.spatial(); ++i) m += p[i];
    m /= static_cast<double>(s.spatial());
    double v = 0.0;
    for (std::size_t i = 0; i < s.spatial(); ++i) v += (p[i] - m) * (p[i] - m);
    mean[bc] = m;
    sd[bc] = std::sqrt(v / static_cast<double>(s.spatial()));
  }
}

// max |Cov - I| over samples for the group rows of y (1/m normalisation).
double group_cov_deviation(const Tensor4& y, std::size_t g) {
  const Shape4& s = y.shape();
  const std::size_t m = s.c / g * s.spatial();
  double worst = 0.0;
  for (std::size_t b = 0; b < s.b; ++b) {
    const double* base = y.data() + b * s.c * s.spatial();
    std::vector<double> mu(g, 0.0);
    for (std::size_t j = 0; j < g; ++j) {
      for (std::size_t i = 0; i < m; ++i) mu[j] += base[j * m + i];
      mu[j] /= static_cast<double>(m);
    }
    for (std::size_t j = 0; j < g; ++j)
      for (std::size_t k = 0; k < g; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < m; ++i) c += (base[j * m + i] - mu[j]) * (base[k * m + i] - mu[k]);
        c /= static_cast<double>(m);
        worst = std::max(worst, std::abs(c - (j == k ? 1.0 : 0.0)));
      }
  }
  return worst;
}

double plain_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) acc += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
  return std::sqrt(acc);
}

CheckResult in_statistics() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n01(0.0, 1.0);
  Tensor4 x(Shape4{4, 8, 6, 6});
  for (double& v : x.values()) v = 2.0 * n01(rng) + 0.5;
  const Tensor4 y = instance_norm(x, InParams::identity(8, 1e-5)).output;
  std::vector<double> mean, sd;
  channel_moments(y, mean, sd);
  double worst_mean = 0.0, worst_sd = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    worst_mean = std::max(worst_mean, std::abs(mean[i]));
    worst_sd = std::max(worst_sd, std::abs(sd[i] - 1.0));
  }
  const double secs = seconds_since(t0);
  return {worst_mean < 1e-6 && worst_sd < 1e-3 && secs < 1.0,
          fmt("max|mean|=%.2e max|std-1|=%.2e", worst_mean, worst_sd) + fmt(" time=%.3fs", secs)};
}

CheckResult in_style_removal() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> gain(0.5, 2.0), shift(-1.0, 1.0);
  const Tensor4 x = uniform(Shape4{4, 8, 6, 6}, rng);
  Tensor4 styled = x.clone_values();
  const std::size_t hw = 36;
  for (std::size_t bc = 0; bc < 32; ++bc) {
    const double a = gain(rng), d = shift(rng);
    for (std::size_t i = 0; i < hw; ++i) styled[bc * hw + i] = a * styled[bc * hw + i] + d;
  }
  // The epsilon added to sigma makes IN(a x + d) differ from IN(x) by about
  // eps |a - 1| / (a sigma^2) per unit; it is taken small enough for 1e-6.
  const InParams p = InParams::identity(8, 1e-8);
  double worst = 0.0;
  const Tensor4 y0 = instance_norm(x, p).output, y1 = instance_norm(styled, p).output;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y0[i] - y1[i]));
  // At the default epsilon the change must equal the closed-form epsilon term.
  const InParams pd = InParams::identity(8, 1e-5);
  const auto base = instance_norm(x, pd);
  const auto moved = instance_norm(styled, pd);
  double term_err = 0.0, default_dev = 0.0;
  for (std::size_t bc = 0; bc < 32; ++bc) {
    const double s = base.stats.std[bc], a = moved.stats.std[bc] / s;
    for (std::size_t i = 0; i < hw; ++i) {
      const double c = x[bc * hw + i] - base.stats.mean[bc];
      const double predicted = c * (a / (a * s + pd.epsilon) - 1.0 / (s + pd.epsilon));
      const double actual = moved.output[bc * hw + i] - base.output[bc * hw + i];
      term_err = std::max(term_err, std::abs(actual - predicted));
      default_dev = std::max(default_dev, std::abs(actual));
    }
  }
  return {worst < 1e-6 && term_err < 1e-10,
          fmt("eps=1e-8: max change %.2e", worst) + fmt("; eps=1e-5: change %.2e, epsilon-term residual %.1e",
                                                          default_dev, term_err)};
}

CheckResult gw_whitening() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(103);
  const Tensor4 x = uniform(Shape4{2, 64, 16, 16}, rng);
  WhitenConfig eig;
  eig.group_count = 16;
  eig.epsilon = 1e-3;
  eig.mode = WhitenMode::eigen_exact;
  WhitenConfig ns = eig;
  ns.mode = WhitenMode::newton_schulz;
  ns.ns_iterations = 7;
  const double de = group_cov_deviation(group_whiten(x, eig).output, 16);
  const double dn = group_cov_deviation(group_whiten(x, ns).output, 16);
  const double secs = seconds_since(t0);
  return {de < 1e-2 && dn < 5e-2 && secs < 5.0,
          fmt("eigen max|Cov-I|=%.2e, NS(7) max|Cov-I|=%.2e", de, dn) + fmt(", g=16, time=%.2fs", secs)};
}

CheckResult ns_vs_eigen() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> log_cond(0.0, 3.0);
  std::uniform_int_distribution<int> size(2, 16);
  WhitenConfig converged;
  converged.ns_iterations = 15;
  converged.residual_tolerance = 1e-3;
  WhitenConfig seven;
  seven.residual_tolerance = 1e300;
  double worst = 0.0, worst7 = 0.0, worst_cond = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double cond = std::pow(10.0, log_cond(rng));
    const auto n = static_cast<Eigen::Index>(size(rng));
    const RowMatrix a = spd(n, cond, rng);
    MatrixBatch m(1, static_cast<std::size_t>(n));
    m.slice(0) = a;
    const RowMatrix ref = eig_inv_sqrt(a);
    const double d = (RowMatrix(inverse_sqrt(m, converged).slice(0)) - ref).cwiseAbs().maxCoeff();
    const double d7 = (RowMatrix(inverse_sqrt(m, seven).slice(0)) - ref).cwiseAbs().maxCoeff();
    worst = std::max(worst, d);
    if (d7 > worst7) {
      worst7 = d7;
      worst_cond = cond;
    }
  }
  return {worst < 1e-3, fmt("15 iterations: max diff %.2e", worst) +
                            fmt("; 7 iterations: max diff %.2e (at cond %.0f)", worst7, worst_cond)};
}

CheckResult partition_round_trip() {
  std::mt19937_64 rng(105);
  const std::size_t divisors[] = {1, 2, 4, 8, 16};
  for (int t = 0; t < 20; ++t) {
    const std::size_t g = divisors[rng() % 5];
    const Shape4 s{1 + rng() % 3, g * (1 + rng() % 4), 1 + rng() % 5, 1 + rng() % 5};
    const Tensor4 x = uniform(s, rng, -10.0, 10.0);
    const Tensor4 back = group_merge(group_partition(x, g), s);
    if (back.shape() != s) return {false, "shape changed for " + s.str()};
    for (std::size_t i = 0; i < x.size(); ++i)
      if (back[i] != x[i]) return {false, "value changed for " + s.str() + " g=" + std::to_string(g)};
  }
  return {true, "20 shape/g combinations bit-identical"};
}

Tensor4 as_tensor(const RowMatrix& m) {
  Tensor4 t(Shape4{1, 1, static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  std::copy(m.data(), m.data() + m.size(), t.data());
  return t;
}

RowMatrix as_matrix(const Tensor4& t) {
  RowMatrix m(static_cast<Eigen::Index>(t.shape().h), static_cast<Eigen::Index>(t.shape().w));
  std::copy(t.data(), t.data() + t.size(), m.data());
  return m;
}

CheckResult gradients() {
  std::mt19937_64 rng(106);
  std::string detail;
  bool ok = true;
  auto record = [&](const std::string& name, double err, double tol) {
    detail += (detail.empty() ? "" : " ") + name + fmt("=%.1e", err);
    ok = ok && err < tol;
  };

  const Tensor4 x = uniform(Shape4{2, 8, 3, 4}, rng);
  const Tensor4 w = uniform(x.shape(), rng);

  InParams inp = InParams::identity(8);
  inp.gamma = uniform(inp.gamma.shape(), rng, 0.5, 1.5);
  inp.beta = uniform(inp.beta.shape(), rng);
  record("IN",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               const auto r = instance_norm(a, inp);
               if (g) *g = instance_norm_backward(a, inp, r.stats, w);
               return weighted_sum(r.output, w);
             },
             x),
         1e-4);

  WhitenConfig wc;
  wc.group_count = 4;
  record("GW",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               const auto r = group_whiten(a, wc);
               if (g) *g = group_whiten_backward(a, wc, r.stats, w);
               return weighted_sum(r.output, w);
             },
             x),
         1e-4);

  auto ca = ChannelAttentionParams::random(8, 2, rng);
  record("CA",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               const auto r = channel_attention(a, ca);
               if (g) *g = channel_attention_backward(a, ca, r.cache, w);
               return weighted_sum(r.output, w);
             },
             x),
         1e-4);

  auto sa = SpatialAttentionParams::random(3, rng);
  record("SA",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               const auto r = spatial_attention(a, sa);
               if (g) *g = spatial_attention_backward(a, sa, r.cache, w);
               return weighted_sum(r.output, w);
             },
             x),
         1e-4);

  AmsOptions opts;
  opts.whiten.group_count = 4;
  opts.reduction = 2;
  opts.sa_kernel = 3;
  AmsParams ams = make_ams_params(8, VariantKind::canonical(), opts, rng);
  ams.in_params.gamma = uniform(ams.in_params.gamma.shape(), rng, 0.5, 1.5);
  ams.in_params.beta = uniform(ams.in_params.beta.shape(), rng);
  record("AMS",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               AmsBlock block(ams, VariantKind::canonical());
               const Tensor4 y = block.forward(a);
               if (g) *g = block.backward(w);
               return weighted_sum(y, w);
             },
             x),
         1e-3);

  const std::vector<int> labels{0, 2, 1, 2, 0, 1};
  record("CE",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               const auto r = softmax_cross_entropy(as_matrix(a), labels);
               if (g) *g = as_tensor(r.grad);
               return r.value;
             },
             as_tensor(gaussian(6, 3, rng))),
         1e-4);

  LossConfig lc;
  lc.margin = 1.0;
  record("triplet",
         grad_check(
             [&](const Tensor4& a, Tensor4* g) {
               const auto r = batch_hard_triplet(as_matrix(a), labels, lc);
               if (g) *g = as_tensor(r.grad);
               return r.value;
             },
             as_tensor(gaussian(6, 4, rng) * 0.5)),
         1e-4);
  return {ok, detail};
}

CheckResult loss_oracles() {
  std::mt19937_64 rng(107);
  const LossConfig cfg;  // margin 0.3
  int mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int p = 2 + static_cast<int>(rng() % 5), k = 2 + static_cast<int>(rng() % 4);
    std::vector<int> ids;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < k; ++j) ids.push_back(3 * i + 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    const RowMatrix f = gaussian(static_cast<Eigen::Index>(ids.size()), 5, rng);
    double oracle = 0.0;
    for (Eigen::Index a = 0; a < f.rows(); ++a) {
      double hardest_pos = -1.0, hardest_neg = INFINITY;
      for (Eigen::Index j = 0; j < f.rows(); ++j) {
        if (j == a) continue;
        const double d = plain_distance(f, a, f, j);
        if (ids[static_cast<std::size_t>(j)] == ids[static_cast<std::size_t>(a)]) {
          hardest_pos = std::max(hardest_pos, d);
        } else {
          hardest_neg = std::min(hardest_neg, d);
        }
      }
      oracle += std::max(0.0, hardest_pos - hardest_neg + cfg.margin);
    }
    const double value = batch_hard_triplet(f, ids, cfg).value;
    worst = std::max(worst, std::abs(value - oracle));
    if (value != oracle) ++mismatches;
  }
  const RowMatrix uniform_logits = RowMatrix::Constant(5, 7, 0.25);
  const double ce = softmax_cross_entropy(uniform_logits, std::vector<int>{0, 1, 2, 3, 6}).value;
  const double ce_err = std::abs(ce - std::log(7.0));
  return {mismatches == 0 && ce_err < 1e-10,
          std::to_string(mismatches) + "/100 triplet mismatches" + fmt(" (max diff %.1e)", worst) +
              fmt(", |CE - ln 7|=%.1e", ce_err)};
}

CheckResult retrieval_oracles() {
  std::mt19937_64 rng(108);
  int mismatches = 0;
  bool monotone = true;
  for (int t = 0; t < 50; ++t) {
    const int nid = 2 + static_cast<int>(rng() % 4);
    const int ng = nid + static_cast<int>(rng() % (20 - nid + 1));
    const int nq = 1 + static_cast<int>(rng() % 5);
    std::vector<int> gid(static_cast<std::size_t>(ng)), qid(static_cast<std::size_t>(nq));
    for (int j = 0; j < ng; ++j) gid[static_cast<std::size_t>(j)] = j < nid ? j : static_cast<int>(rng() % static_cast<unsigned>(nid));
    for (int& q : qid) q = static_cast<int>(rng() % static_cast<unsigned>(nid));
    // Coarse coordinates make distance ties common.
    RowMatrix q(nq, 2), g(ng, 2);
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = static_cast<double>(rng() % 4);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = static_cast<double>(rng() % 4);
    const RetrievalReport r = retrieval_eval(q, qid, g, gid);

    // Enumerate: position of gallery item j = 1 + items strictly ahead of it.
    double map = 0.0;
    std::vector<double> cmc(static_cast<std::size_t>(ng), 0.0);
    for (int a = 0; a < nq; ++a) {
      std::vector<int> pos(static_cast<std::size_t>(ng), 1);
      for (int j = 0; j < ng; ++j)
        for (int i = 0; i < ng; ++i) {
          const double di = plain_distance(q, a, g, i), dj = plain_distance(q, a, g, j);
          if (di < dj || (di == dj && i < j)) ++pos[static_cast<std::size_t>(j)];
        }
      std::vector<int> rel;
      for (int j = 0; j < ng; ++j)
        if (gid[static_cast<std::size_t>(j)] == qid[static_cast<std::size_t>(a)]) rel.push_back(pos[static_cast<std::size_t>(j)]);
      std::sort(rel.begin(), rel.end());
      double ap = 0.0;
      for (std::size_t i = 0; i < rel.size(); ++i) ap += static_cast<double>(i + 1) / static_cast<double>(rel[i]);
      map += ap / static_cast<double>(rel.size());
      for (int k = rel.front(); k <= ng; ++k) cmc[static_cast<std::size_t>(k - 1)] += 1.0;
    }
    map /= static_cast<double>(nq);
    for (double& c : cmc) c /= static_cast<double>(nq);
    if (r.map != map || r.cmc != cmc) ++mismatches;
    for (std::size_t k = 1; k < r.cmc.size(); ++k) monotone = monotone && r.cmc[k] >= r.cmc[k - 1];
  }
  // One-hot embeddings by identity.
  RowMatrix qe = RowMatrix::Zero(3, 3), ge = RowMatrix::Zero(6, 3);
  for (int i = 0; i < 3; ++i) qe(i, i) = 1.0;
  for (int j = 0; j < 6; ++j) ge(j, j % 3) = 1.0;
  const RetrievalReport perfect = retrieval_eval(qe, std::vector<int>{0, 1, 2}, ge, std::vector<int>{0, 1, 2, 0, 1, 2});
  const bool perfect_ok = perfect.map == 1.0 && perfect.cmc.front() == 1.0;
  return {mismatches == 0 && monotone && perfect_ok,
          std::to_string(mismatches) + "/50 enumeration mismatches, CMC " + (monotone ? "monotone" : "NOT monotone") +
              fmt(", perfect embeddings mAP=%.3f R1=%.3f", perfect.map, perfect.cmc.front())};
}

CheckResult variant_gradients() {
  std::mt19937_64 rng(109);
  const Combination all[] = {Combination::in_gw,  Combination::gw_in,  Combination::in_and_gw, Combination::in_xgw,
                             Combination::gw_xin, Combination::in_only, Combination::gw_only,  Combination::none};
  AmsOptions opts;
  opts.whiten.group_count = 4;
  opts.reduction = 2;
  opts.sa_kernel = 3;
  double worst = 0.0;
  std::string worst_label;
  for (Combination c : all) {
    const VariantKind v{c, AttentionKind::casa, AttentionKind::casa};
    AmsParams p = make_ams_params(8, v, opts, rng);
    p.in_params.gamma = uniform(p.in_params.gamma.shape(), rng, 0.5, 1.5);
    p.in_params.beta = uniform(p.in_params.beta.shape(), rng);
    const Tensor4 x = uniform(Shape4{2, 8, 3, 3}, rng), w = uniform(x.shape(), rng);
    const double err = grad_check(
        [&](const Tensor4& a, Tensor4* g) {
          AmsBlock block(p, v);
          const Tensor4 y = block.forward(a);
          if (g) *g = block.backward(w);
          return weighted_sum(y, w);
        },
        x);
    if (err > worst) {
      worst = err;
      worst_label = v.label();
    }
  }
  return {worst < 1e-3, fmt("worst rel. err %.1e", worst) + " (" + worst_label + ")"};
}

CheckResult conv_oracle() {
  std::mt19937_64 rng(110);
  const Tensor4 x = uniform(Shape4{2, 3, 5, 4}, rng), k = uniform(Shape4{4, 3, 3, 3}, rng);
  const Tensor4 y = conv2d(x, k);
  double worst = 0.0;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t o = 0; o < 4; ++o)
      for (long h = 0; h < 5; ++h)
        for (long w = 0; w < 4; ++w) {
          double acc = 0.0;
          for (std::size_t c = 0; c < 3; ++c)
            for (long u = 0; u < 3; ++u)
              for (long v = 0; v < 3; ++v) {
                const long hh = h + u - 1, ww = w + v - 1;
                if (hh < 0 || ww < 0 || hh >= 5 || ww >= 4) continue;
                acc += k.at(o, c, static_cast<std::size_t>(u), static_cast<std::size_t>(v)) *
                       x.at(b, c, static_cast<std::size_t>(hh), static_cast<std::size_t>(ww));
              }
          worst = std::max(worst, std::abs(acc - y.at(b, o, static_cast<std::size_t>(h), static_cast<std::size_t>(w))));
        }
  return {worst < 1e-12, fmt("max diff vs nested loops %.1e", worst)};
}

}  // namespace

std::vector<NamedCheck> invariant_checks() {
  return {
      {"in-statistics", "IN output per-(b,c) mean 0 and std 1", in_statistics},
      {"in-style-removal", "IN removes per-(b,c) affine style", in_style_removal},
      {"gw-whitening", "GW output group covariance is identity", gw_whitening},
      {"ns-vs-eigen", "Newton-Schulz inverse sqrt agrees with eigendecomposition", ns_vs_eigen},
      {"partition-round-trip", "group partition/merge is bit-exact", partition_round_trip},
      {"gradients", "finite-difference checks for IN, GW, CA, SA, AMS, CE, triplet", gradients},
      {"loss-oracles", "triplet vs exhaustive scan, CE on uniform logits", loss_oracles},
      {"retrieval-oracles", "mAP/CMC vs brute-force enumeration", retrieval_oracles},
      {"variant-gradients", "every combination with CA+SA at both stages", variant_gradients},
      {"conv-oracle", "conv2d vs nested loops", conv_oracle},
  };
}

CheckResult run_check(const NamedCheck& check) {
  try {
    return check.run();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace ams::harness
