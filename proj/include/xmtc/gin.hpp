// Copyright 2026 The xmtc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "xmtc/error.hpp"
#include "xmtc/keygraph.hpp"
#include "xmtc/types.hpp"

namespace xmtc {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row i of the result is w x_i + b. Rows are computed one at a time on
/// freshly allocated vectors, so a row's value never depends on its
/// position in `x`.
template <typename Scalar>
MatrixX<Scalar> affine_rows(const MatrixX<Scalar>& x, const MatrixX<Scalar>& w,
                            const VectorX<Scalar>& b) {
  MatrixX<Scalar> y(x.rows(), w.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const VectorX<Scalar> xi = x.row(i).transpose();
    const VectorX<Scalar> yi = w * xi + b;
    y.row(i) = yi.transpose();
  }
  return y;
}

/// Sum in ascending order: the result is independent of the order the
/// terms were collected in. Clobbers `terms`.
template <typename Scalar>
Scalar canonical_sum(std::vector<Scalar>& terms) {
  std::sort(terms.begin(), terms.end());
  Scalar total(0);
  for (Scalar t : terms) total += t;
  return total;
}

/// Two affine maps with a rectifier in between. Rows of the input are
/// samples: Y = relu(X W1^T + b1) W2^T + b2.
template <typename Scalar>
struct Mlp {
  MatrixX<Scalar> w1, w2;  // hidden x in, out x hidden
  VectorX<Scalar> b1, b2;

  Index input_dim() const { return w1.cols(); }
  Index hidden_dim() const { return w1.rows(); }
  Index output_dim() const { return w2.rows(); }

  static Mlp zeros(Index in, Index hidden, Index out) {
    return {MatrixX<Scalar>::Zero(hidden, in), MatrixX<Scalar>::Zero(out, hidden),
            VectorX<Scalar>::Zero(hidden), VectorX<Scalar>::Zero(out)};
  }

  static Mlp identity(Index dim) {
    Mlp m = zeros(dim, dim, dim);
    m.w1.setIdentity();
    m.w2.setIdentity();
    return m;
  }

  /// He-scaled Gaussian weights, zero biases.
  template <typename Rng>
  static Mlp random(Index in, Index hidden, Index out, Rng& rng) {
    Mlp m = zeros(in, hidden, out);
    std::normal_distribution<double> n1(0.0, std::sqrt(2.0 / static_cast<double>(std::max<Index>(in, 1))));
    std::normal_distribution<double> n2(0.0, std::sqrt(1.0 / static_cast<double>(std::max<Index>(hidden, 1))));
    for (Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = static_cast<Scalar>(n1(rng));
    for (Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = static_cast<Scalar>(n2(rng));
    return m;
  }

  MatrixX<Scalar> forward(const MatrixX<Scalar>& x) const {
    if (x.cols() != input_dim()) throw InvalidArgument("Mlp: input width mismatch");
    const MatrixX<Scalar> hidden = affine_rows(x, w1, b1).cwiseMax(Scalar(0));
    return affine_rows(hidden, w2, b2);
  }
};

/// One GIN layer: h' = MLP((1 + eps) h + sum of neighbour h).
template <typename Scalar>
struct GinLayer {
  Mlp<Scalar> mlp;
  Scalar eps = Scalar(0);
};

template <typename Scalar>
MatrixX<Scalar> gin_aggregate(const MatrixX<Scalar>& h,
                              const Eigen::SparseMatrix<Scalar>& adjacency, Scalar eps) {
  if (adjacency.rows() != h.rows() || adjacency.cols() != h.rows())
    throw InvalidArgument("gin_layer: adjacency does not match feature rows");
  // Neighbour sums are taken in canonical order so that relabelling the
  // vertices permutes the output rows bit for bit.
  const Eigen::SparseMatrix<Scalar, Eigen::RowMajor> rows = adjacency;
  MatrixX<Scalar> u(h.rows(), h.cols());
  std::vector<Scalar> terms;
  for (Index v = 0; v < h.rows(); ++v) {
    for (Index c = 0; c < h.cols(); ++c) {
      terms.clear();
      for (typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator it(rows, v); it; ++it)
        terms.push_back(it.value() * h(it.col(), c));
      u(v, c) = (Scalar(1) + eps) * h(v, c) + canonical_sum(terms);
    }
  }
  return u;
}

template <typename Scalar>
MatrixX<Scalar> gin_layer(const MatrixX<Scalar>& h,
                          const Eigen::SparseMatrix<Scalar>& adjacency, Scalar eps,
                          const Mlp<Scalar>& mlp) {
  return mlp.forward(gin_aggregate(h, adjacency, eps));
}

/// CONCAT over layers of SUM over vertices.
template <typename Scalar>
VectorX<Scalar> readout(std::span<const MatrixX<Scalar>> layers) {
  Index dim = 0;
  for (const auto& h : layers) dim += h.cols();
  VectorX<Scalar> out(dim);
  Index offset = 0;
  for (const auto& h : layers) {
    std::vector<Scalar> terms;
    for (Index c = 0; c < h.cols(); ++c) {
      terms.assign(h.col(c).data(), h.col(c).data() + h.rows());
      out[offset + c] = canonical_sum(terms);
    }
    offset += h.cols();
  }
  return out;
}

template <typename Scalar>
struct GinBranch {
  Index input_dim = 0;
  std::vector<GinLayer<Scalar>> layers;

  Index readout_dim() const {
    Index d = input_dim;
    for (const auto& l : layers) d += l.mlp.output_dim();
    return d;
  }

  template <typename Rng>
  static GinBranch random(Index input_dim, Index hidden, Index num_layers, Rng& rng) {
    GinBranch b;
    b.input_dim = input_dim;
    Index in = input_dim;
    for (Index k = 0; k < num_layers; ++k) {
      b.layers.push_back({Mlp<Scalar>::random(in, hidden, hidden, rng), Scalar(0)});
      in = hidden;
    }
    return b;
  }
};

/// Cached activations of one branch on one graph.
template <typename Scalar>
struct BranchTrace {
  std::vector<MatrixX<Scalar>> h;           // h[0] input, h[k] layer k output
  std::vector<MatrixX<Scalar>> aggregated;  // (1 + eps) h + A h, per layer
  std::vector<MatrixX<Scalar>> hidden;      // rectified MLP hidden units
  VectorX<Scalar> readout;
};

template <typename Scalar>
BranchTrace<Scalar> branch_forward(const GinBranch<Scalar>& branch,
                                   const Eigen::SparseMatrix<Scalar>& adjacency,
                                   const MatrixX<Scalar>& features) {
  if (features.cols() != branch.input_dim)
    throw InvalidArgument("branch_forward: feature width " + std::to_string(features.cols()) +
                          " != " + std::to_string(branch.input_dim));
  BranchTrace<Scalar> t;
  t.h.push_back(features);
  for (const auto& layer : branch.layers) {
    const auto& mlp = layer.mlp;
    t.aggregated.push_back(gin_aggregate(t.h.back(), adjacency, layer.eps));
    t.hidden.push_back(MatrixX<Scalar>(affine_rows(t.aggregated.back(), mlp.w1, mlp.b1).cwiseMax(Scalar(0))));
    t.h.push_back(affine_rows(t.hidden.back(), mlp.w2, mlp.b2));
  }
  t.readout = readout<Scalar>(t.h);
  return t;
}

/// Accumulates d(loss)/d(parameters) of `branch` into `grad` given
/// d(loss)/d(readout). `grad` has the branch's shapes.
template <typename Scalar>
void branch_backward(const GinBranch<Scalar>& branch,
                     const Eigen::SparseMatrix<Scalar>& adjacency,
                     const BranchTrace<Scalar>& trace, const VectorX<Scalar>& d_readout,
                     GinBranch<Scalar>& grad) {
  const auto num_layers = static_cast<Index>(branch.layers.size());
  // Offsets of each layer's block inside the readout vector.
  std::vector<Index> offset(num_layers + 1);
  offset[0] = 0;
  for (Index k = 0; k < num_layers; ++k) offset[k + 1] = offset[k] + trace.h[k].cols();

  const Index v = trace.h[0].rows();
  MatrixX<Scalar> d_h;  // d loss / d h[k], flowing down
  for (Index k = num_layers; k >= 1; --k) {
    const auto& layer = branch.layers[k - 1];
    auto& g = grad.layers[k - 1];
    const Index width = trace.h[k].cols();
    // Readout contributes the same row gradient to every vertex.
    MatrixX<Scalar> d_out = d_readout.segment(offset[k], width).transpose().replicate(v, 1);
    if (k < num_layers) d_out += d_h;

    g.mlp.w2.noalias() += d_out.transpose() * trace.hidden[k - 1];
    g.mlp.b2 += d_out.colwise().sum().transpose();
    MatrixX<Scalar> d_pre = d_out * layer.mlp.w2;
    d_pre = d_pre.cwiseProduct(
        (trace.hidden[k - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    g.mlp.w1.noalias() += d_pre.transpose() * trace.aggregated[k - 1];
    g.mlp.b1 += d_pre.colwise().sum().transpose();
    const MatrixX<Scalar> d_agg = d_pre * layer.mlp.w1;
    g.eps += d_agg.cwiseProduct(trace.h[k - 1]).sum();
    if (k > 1) {
      d_h = (Scalar(1) + layer.eps) * d_agg;
      d_h.noalias() += adjacency.transpose() * d_agg;
    }
  }
}

/// alpha = 1 - (t / t_max)^2 for 0 <= t <= t_max.
template <typename Scalar = double>
Scalar alpha_schedule(Index t, Index t_max) {
  if (t_max < 1) throw InvalidArgument("alpha_schedule: t_max must be >= 1");
  if (t < 0 || t > t_max) throw InvalidArgument("alpha_schedule: t outside [0, t_max]");
  const Scalar r = static_cast<Scalar>(t) / static_cast<Scalar>(t_max);
  return Scalar(1) - r * r;
}

template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar sigmoid(Scalar x) {
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-x))
                        : std::exp(x) / (Scalar(1) + std::exp(x));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

/// sigma(alpha W_c h_c + (1 - alpha) W_r h_r).
template <typename Scalar>
VectorX<Scalar> mix_logits(const VectorX<Scalar>& h_c, const VectorX<Scalar>& h_r,
                           const MatrixX<Scalar>& w_c, const MatrixX<Scalar>& w_r,
                           Scalar alpha) {
  if (w_c.cols() != h_c.size() || w_r.cols() != h_r.size() || w_c.rows() != w_r.rows())
    throw InvalidArgument("mix_logits: dimension mismatch");
  const VectorX<Scalar> z = alpha * (w_c * h_c) + (Scalar(1) - alpha) * (w_r * h_r);
  return sigmoid(z);
}

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean binary cross-entropy over the K entries; g_hat clamped first.
template <typename Scalar>
Scalar binary_cross_entropy(const VectorX<Scalar>& g_hat, const VectorX<Scalar>& g) {
  const Scalar lo = static_cast<Scalar>(kProbabilityClamp);
  Scalar total = 0;
  for (Index k = 0; k < g.size(); ++k) {
    const Scalar p = std::clamp(g_hat[k], lo, Scalar(1) - lo);
    total -= g[k] * std::log(p) + (Scalar(1) - g[k]) * std::log(Scalar(1) - p);
  }
  return total / static_cast<Scalar>(g.size());
}

/// alpha E(g_hat, g_c) + (1 - alpha) E(g_hat, g_r).
template <typename Scalar>
Scalar matching_loss(const VectorX<Scalar>& g_hat, const VectorX<Scalar>& g_c,
                     const VectorX<Scalar>& g_r, Scalar alpha) {
  if (g_hat.size() != g_c.size() || g_hat.size() != g_r.size())
    throw InvalidArgument("matching_loss: dimension mismatch");
  return alpha * binary_cross_entropy(g_hat, g_c) +
         (Scalar(1) - alpha) * binary_cross_entropy(g_hat, g_r);
}

/// d matching_loss / d logits, with zero gradient where the clamp is active.
template <typename Scalar>
VectorX<Scalar> matching_loss_logit_gradient(const VectorX<Scalar>& g_hat,
                                             const VectorX<Scalar>& g_c,
                                             const VectorX<Scalar>& g_r, Scalar alpha) {
  const Scalar lo = static_cast<Scalar>(kProbabilityClamp);
  const Scalar k = static_cast<Scalar>(g_hat.size());
  VectorX<Scalar> d(g_hat.size());
  for (Index i = 0; i < g_hat.size(); ++i) {
    const bool clamped = g_hat[i] < lo || g_hat[i] > Scalar(1) - lo;
    const Scalar target = alpha * g_c[i] + (Scalar(1) - alpha) * g_r[i];
    d[i] = clamped ? Scalar(0) : (g_hat[i] - target) / k;
  }
  return d;
}

// ---------------------------------------------------------------------------

struct MatcherShape {
  Index input_dim = 0;
  Index hidden_dim = 64;
  Index num_layers = 2;
  Index num_clusters = 2;
};

/// Bilateral-branch matcher: a conventional and a re-balance GIN branch,
/// each with its own linear cluster classifier.
template <typename Scalar>
struct MatcherModel {
  GinBranch<Scalar> conventional;
  GinBranch<Scalar> rebalance;
  MatrixX<Scalar> w_c, w_r;  // K x readout_dim
  VectorX<Scalar> b_c, b_r;  // K
  bool learn_eps = false;
  bool use_bias = true;
  bool rebalance_enabled = true;

  Index num_clusters() const { return w_c.rows(); }
  Index input_dim() const { return conventional.input_dim; }
  Index readout_dim() const { return conventional.readout_dim(); }

  /// Random GIN weights, zero classifiers.
  template <typename Rng>
  static MatcherModel create(const MatcherShape& shape, Rng& rng) {
    if (shape.num_clusters < 1 || shape.input_dim < 1 || shape.num_layers < 0 ||
        (shape.num_layers > 0 && shape.hidden_dim < 1))
      throw InvalidArgument("MatcherModel: invalid shape");
    MatcherModel m;
    m.conventional = GinBranch<Scalar>::random(shape.input_dim, shape.hidden_dim, shape.num_layers, rng);
    m.rebalance = GinBranch<Scalar>::random(shape.input_dim, shape.hidden_dim, shape.num_layers, rng);
    const Index d = m.conventional.readout_dim();
    m.w_c = MatrixX<Scalar>::Zero(shape.num_clusters, d);
    m.w_r = MatrixX<Scalar>::Zero(shape.num_clusters, d);
    m.b_c = VectorX<Scalar>::Zero(shape.num_clusters);
    m.b_r = VectorX<Scalar>::Zero(shape.num_clusters);
    return m;
  }

  /// Same shapes, all parameters zero.
  MatcherModel zeros_like() const {
    MatcherModel z = *this;
    visit_parameters(z, [](std::span<Scalar> p, bool) { std::fill(p.begin(), p.end(), Scalar(0)); });
    return z;
  }
};

/// Calls fn(span over a parameter block, trainable) for every parameter
/// block in a fixed order. Works on const and non-const models.
template <typename Model, typename Fn>
void visit_parameters(Model& model, Fn&& fn) {
  auto block = [&](auto& m, bool trainable) {
    fn(std::span(m.data(), static_cast<std::size_t>(m.size())), trainable);
  };
  for (auto* branch : {&model.conventional, &model.rebalance}) {
    for (auto& layer : branch->layers) {
      block(layer.mlp.w1, true);
      block(layer.mlp.b1, true);
      block(layer.mlp.w2, true);
      block(layer.mlp.b2, true);
      fn(std::span(&layer.eps, 1), model.learn_eps);
    }
  }
  block(model.w_c, true);
  block(model.w_r, true);
  block(model.b_c, model.use_bias);
  block(model.b_r, model.use_bias);
}

/// Paired forward/backward for one training pair. Returns the loss and,
/// when `grad` is non-null, accumulates its gradient there.
template <typename Scalar>
Scalar pair_loss_and_gradient(const MatcherModel<Scalar>& model,
                              const Eigen::SparseMatrix<Scalar>& adjacency_c,
                              const MatrixX<Scalar>& features_c, const VectorX<Scalar>& target_c,
                              const Eigen::SparseMatrix<Scalar>& adjacency_r,
                              const MatrixX<Scalar>& features_r, const VectorX<Scalar>& target_r,
                              Scalar alpha, MatcherModel<Scalar>* grad) {
  const auto trace_c = branch_forward(model.conventional, adjacency_c, features_c);
  const auto trace_r = branch_forward(model.rebalance, adjacency_r, features_r);
  VectorX<Scalar> logits = alpha * (model.w_c * trace_c.readout) +
                           (Scalar(1) - alpha) * (model.w_r * trace_r.readout);
  if (model.use_bias) logits += alpha * model.b_c + (Scalar(1) - alpha) * model.b_r;
  const VectorX<Scalar> g_hat = sigmoid(logits);
  const Scalar loss = matching_loss(g_hat, target_c, target_r, alpha);
  if (!grad) return loss;

  const VectorX<Scalar> dz = matching_loss_logit_gradient(g_hat, target_c, target_r, alpha);
  const VectorX<Scalar> dz_c = alpha * dz;
  const VectorX<Scalar> dz_r = (Scalar(1) - alpha) * dz;
  grad->w_c.noalias() += dz_c * trace_c.readout.transpose();
  grad->w_r.noalias() += dz_r * trace_r.readout.transpose();
  if (model.use_bias) {
    grad->b_c += dz_c;
    grad->b_r += dz_r;
  }
  if (alpha != Scalar(0))
    branch_backward(model.conventional, adjacency_c, trace_c,
                    VectorX<Scalar>(model.w_c.transpose() * dz_c), grad->conventional);
  if (alpha != Scalar(1))
    branch_backward(model.rebalance, adjacency_r, trace_r,
                    VectorX<Scalar>(model.w_r.transpose() * dz_r), grad->rebalance);
  return loss;
}

}  // namespace xmtc
