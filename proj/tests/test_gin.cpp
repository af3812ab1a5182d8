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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gin_fixtures.hpp"
#include "xmtc/gin.hpp"
#include "xmtc/matcher.hpp"

using namespace xmtc;

namespace {

SparseMatrixD edge_pair() {
  SparseMatrixD a(2, 2);
  a.insert(0, 1) = 1.0;
  a.insert(1, 0) = 1.0;
  return a;
}

}  // namespace

TEST(GinLayer, IsolatedVertexWithIdentityMlp) {
  const Eigen::MatrixXd h = (Eigen::MatrixXd(1, 3) << 0.5, 2.0, 0.0).finished();
  const SparseMatrixD a(1, 1);
  EXPECT_EQ(gin_layer(h, a, 0.0, Mlp<double>::identity(3)), h);
}

TEST(GinLayer, NeighbourSum) {
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd out = gin_layer(h, edge_pair(), 0.0, Mlp<double>::identity(2));
  EXPECT_EQ(out, Eigen::MatrixXd::Ones(2, 2));
}

TEST(GinLayer, EpsScalesSelfTerm) {
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd out = gin_aggregate(h, edge_pair(), 0.5);
  EXPECT_EQ(out, (Eigen::MatrixXd(2, 2) << 1.5, 1.0, 1.0, 1.5).finished());
}

TEST(GinLayer, ShapeMismatchIsAnError) {
  EXPECT_THROW(gin_aggregate(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 2)), edge_pair(), 0.0),
               InvalidArgument);
  EXPECT_THROW(Mlp<double>::identity(3).forward(Eigen::MatrixXd::Zero(2, 2)), InvalidArgument);
}

TEST(GinLayer, PermutationEquivariance) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 30; ++rep) {
    const GraphInput g = fixtures::random_graph(rng, 7, 5);
    const auto perm = fixtures::random_permutation(rng, 7);
    const GraphInput twin = fixtures::permuted(g, perm);
    const Mlp<double> mlp = Mlp<double>::random(5, 6, 4, rng);
    const Eigen::MatrixXd out = gin_layer(g.features, g.adjacency, 0.0, mlp);
    const Eigen::MatrixXd out_twin = gin_layer(twin.features, twin.adjacency, 0.0, mlp);
    for (Index v = 0; v < 7; ++v) EXPECT_EQ(out.row(v), out_twin.row(perm[v]));
  }
}

TEST(Readout, SingleVertexNoLayers) {
  const Eigen::MatrixXd h = (Eigen::MatrixXd(1, 3) << 1, 2, 3).finished();
  const std::vector<Eigen::MatrixXd> layers = {h};
  EXPECT_EQ(readout<double>(layers), Eigen::Vector3d(1, 2, 3));
}

TEST(Readout, DimensionIsSumOfLayerWidths) {
  std::mt19937_64 rng(2);
  const GinBranch<double> branch = GinBranch<double>::random(5, 7, 2, rng);
  const GraphInput g = fixtures::random_graph(rng, 4, 5);
  EXPECT_EQ(branch_forward(branch, g.adjacency, g.features).readout.size(), 5 + 2 * 7);
  EXPECT_EQ(branch.readout_dim(), 19);
}

TEST(Readout, InvariantUnderVertexPermutation) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const GraphInput g = fixtures::random_graph(rng, 8, 4);
    const GraphInput twin = fixtures::permuted(g, fixtures::random_permutation(rng, 8));
    const GinBranch<double> branch = GinBranch<double>::random(4, 6, 2, rng);
    EXPECT_EQ(branch_forward(branch, g.adjacency, g.features).readout,
              branch_forward(branch, twin.adjacency, twin.features).readout);
  }
}

TEST(AlphaSchedule, ParabolicDecay) {
  EXPECT_EQ(alpha_schedule(0, 30), 1.0);
  EXPECT_EQ(alpha_schedule(30, 30), 0.0);
  EXPECT_EQ(alpha_schedule(15, 30), 0.75);
  EXPECT_THROW(alpha_schedule(31, 30), InvalidArgument);
  EXPECT_THROW(alpha_schedule(-1, 30), InvalidArgument);
  EXPECT_THROW(alpha_schedule(0, 0), InvalidArgument);
}

TEST(MixLogits, BoundaryCases) {
  const Eigen::MatrixXd w_c = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd w_r = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(mix_logits<double>(zero, zero, w_c, w_r, 0.3), Eigen::VectorXd::Constant(2, 0.5));

  const Eigen::Vector2d h_c(1.0, -2.0), h_r(100.0, 100.0);
  const Eigen::VectorXd only_c = mix_logits<double>(h_c, h_r, w_c, w_r, 1.0);
  EXPECT_EQ(only_c, sigmoid(Eigen::VectorXd(h_c)));

  const Eigen::Vector2d two(2.0, 2.0), minus_two(-2.0, -2.0);
  EXPECT_EQ(mix_logits<double>(two, minus_two, w_c, w_r, 0.5), Eigen::VectorXd::Constant(2, 0.5));
}

TEST(MixLogits, MonotoneInEachLogit) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(1, 1);
  double last = 0.0;
  for (double z = -5.0; z <= 5.0; z += 0.5) {
    const double g = mix_logits<double>(Eigen::VectorXd::Constant(1, z), Eigen::VectorXd::Constant(1, 0.3),
                                        w, w, 0.6)[0];
    EXPECT_GT(g, last);
    EXPECT_GT(g, 0.0);
    EXPECT_LT(g, 1.0);
    last = g;
  }
}

TEST(MatchingLoss, DirectSubstitution) {
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(1, 0.5);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1), zero = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(matching_loss<double>(half, one, zero, 0.5), std::log(2.0), 1e-15);
  const Eigen::Vector3d g(1.0, 0.0, 1.0);
  EXPECT_LT(matching_loss<double>(g, g, g, 0.4), 1e-6);
  const Eigen::Vector3d g_hat(0.9, 0.2, 0.6), other(0.0, 1.0, 0.0);
  EXPECT_EQ(matching_loss<double>(g_hat, g, other, 1.0), binary_cross_entropy<double>(g_hat, g));
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const auto p = fixtures::random_pair_problem(rng);
    EXPECT_LT(fixtures::check_gradient(p).max_relative_error, 1e-4);
  }
}

TEST(Backward, ZeroLossGivesZeroGradient) {
  std::mt19937_64 rng(5);
  auto p = fixtures::random_pair_problem(rng);
  p.target_r = p.target_c;
  p.model.w_c.setZero();
  p.model.w_r.setZero();
  p.model.use_bias = true;
  for (Index k = 0; k < p.target_c.size(); ++k)
    p.model.b_c[k] = p.model.b_r[k] = p.target_c[k] > 0.5 ? 40.0 : -40.0;
  Matcher grad = p.model.zeros_like();
  pair_loss_and_gradient(p.model, p.conventional.adjacency, p.conventional.features, p.target_c,
                         p.rebalance.adjacency, p.rebalance.features, p.target_r, p.alpha, &grad);
  double norm2 = 0.0;
  visit_parameters(grad, [&](std::span<double> g, bool) {
    for (double v : g) norm2 += v * v;
  });
  EXPECT_LT(std::sqrt(norm2), 1e-6);
}

TEST(Backward, RebalanceClassifierGradientScalesWithOneMinusAlpha) {
  std::mt19937_64 rng(6);
  auto p = fixtures::random_pair_problem(rng);
  auto grad_at = [&](double alpha) {
    p.alpha = alpha;
    Matcher g = p.model.zeros_like();
    pair_loss_and_gradient(p.model, p.conventional.adjacency, p.conventional.features, p.target_c,
                           p.rebalance.adjacency, p.rebalance.features, p.target_r, alpha, &g);
    return g;
  };
  const Matcher at_one = grad_at(1.0);
  EXPECT_EQ(at_one.w_r.norm(), 0.0);
  EXPECT_EQ(at_one.b_r.norm(), 0.0);
  for (const auto& layer : at_one.rebalance.layers) EXPECT_EQ(layer.mlp.w1.norm(), 0.0);
  const Matcher at_zero = grad_at(0.0);
  EXPECT_EQ(at_zero.w_c.norm(), 0.0);
}

TEST(Matcher, ZeroLayersIsLinearOverSummedFeatures) {
  std::mt19937_64 rng(7);
  const Matcher m = fixtures::random_matcher(rng, {4, 8, 0, 3});
  const GraphInput g = fixtures::random_graph(rng, 5, 4);
  const Eigen::VectorXd sum = g.features.colwise().sum().transpose();
  const Eigen::VectorXd expected =
      sigmoid(Eigen::VectorXd(0.5 * (m.w_c * sum + m.w_r * sum) + 0.5 * (m.b_c + m.b_r)));
  EXPECT_TRUE(cluster_scores(m, g).isApprox(expected, 1e-12));
}

TEST(Matcher, UntrainedClassifiersTieAtOneHalf) {
  std::mt19937_64 rng(8);
  const Matcher m = Matcher::create({4, 8, 2, 5}, rng);
  const GraphInput g = fixtures::random_graph(rng, 5, 4);
  const auto ranked = predict_clusters(m, g);
  ASSERT_EQ(ranked.size(), 5u);
  for (Index k = 0; k < 5; ++k) {
    EXPECT_EQ(ranked[k].cluster, k);
    EXPECT_EQ(ranked[k].score, 0.5);
  }
}

TEST(Matcher, ScoresInvariantUnderVertexPermutation) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const Matcher m = fixtures::random_matcher(rng, {6, 8, 2, 4});
    const GraphInput g = fixtures::random_graph(rng, 9, 6, 0.3, true);
    const GraphInput twin = fixtures::permuted(g, fixtures::random_permutation(rng, 9));
    EXPECT_EQ(cluster_scores(m, g), cluster_scores(m, twin));
  }
}

TEST(Matcher, ParameterVisitOrderIsStable) {
  std::mt19937_64 rng(10);
  const Matcher m = Matcher::create({3, 4, 2, 2}, rng);
  std::vector<std::size_t> sizes;
  std::vector<bool> trainable;
  visit_parameters(m, [&](std::span<const double> p, bool t) {
    sizes.push_back(p.size());
    trainable.push_back(t);
  });
  // Per branch and layer: w1, b1, w2, b2, eps; then w_c, w_r, b_c, b_r.
  const std::vector<std::size_t> expected = {12, 4, 16, 4, 1, 16, 4, 16, 4, 1,
                                             12, 4, 16, 4, 1, 16, 4, 16, 4, 1,
                                             22, 22, 2, 2};
  EXPECT_EQ(sizes, expected);
  EXPECT_FALSE(trainable[4]);
  EXPECT_TRUE(trainable.back());
}
