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

#include <random>
#include <sstream>

#include "gin_fixtures.hpp"
#include "xmtc/matcher.hpp"

using namespace xmtc;

namespace {

// Graphs whose vertex features point along the axis of their cluster, so
// the two clusters are linearly separable after READOUT.
struct SeparableProblem {
  std::vector<GraphInput> graphs;
  Eigen::MatrixXd targets;
  std::vector<LabelSet> labels;
};

SeparableProblem separable(std::mt19937_64& rng, Index n) {
  SeparableProblem p;
  p.targets = Eigen::MatrixXd::Zero(n, 2);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_int_distribution<Index> size(2, 5);
  for (Index i = 0; i < n; ++i) {
    // Cluster 0 is four times as common as cluster 1.
    const Index c = i % 5 == 0 ? 1 : 0;
    GraphInput g = fixtures::random_graph(rng, size(rng), 4, 0.5);
    for (Index v = 0; v < g.num_vertices(); ++v)
      for (Index j = 0; j < 4; ++j) g.features(v, j) = (j == c ? 1.0 : 0.0) + noise(rng);
    p.graphs.push_back(std::move(g));
    p.targets(i, c) = 1.0;
    p.labels.push_back({static_cast<LabelId>(c)});
  }
  return p;
}

MatcherConfig small_config() {
  MatcherConfig c;
  c.hidden_dim = 8;
  c.max_epoch = 10;
  c.batch_size = 8;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Training, LossDecreasesOnFixedBatch) {
  std::mt19937_64 rng(1);
  const auto p = separable(rng, 12);
  Matcher model = Matcher::create({4, 8, 2, 2}, rng);
  // Plain gradient descent: heavy-ball momentum may overshoot a single batch.
  SgdMomentum sgd(model, 0.0);
  std::vector<Index> rows(12);
  for (Index i = 0; i < 12; ++i) rows[i] = i;
  std::vector<Index> reversed(rows.rbegin(), rows.rend());
  double last = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 50; ++step) {
    Matcher grad = model.zeros_like();
    const double loss = batch_loss_and_gradient(model, p.graphs, p.targets, rows, reversed, 0.5, &grad);
    EXPECT_LT(loss, last) << "step " << step;
    last = loss;
    sgd.step(model, grad, 0.01);
  }
}

TEST(Training, SeedFixedRunIsReproducible) {
  std::mt19937_64 rng(2);
  const auto p = separable(rng, 40);
  const auto a = train_matcher(p.graphs, p.targets, p.labels, 2, small_config());
  const auto b = train_matcher(p.graphs, p.targets, p.labels, 2, small_config());
  std::ostringstream sa, sb;
  write_matcher(sa, a.model);
  write_matcher(sb, b.model);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.best_epoch, b.best_epoch);
}

TEST(Training, SeparableClustersAreMatched) {
  std::mt19937_64 rng(3);
  const auto p = separable(rng, 100);
  MatcherConfig c = small_config();
  c.max_epoch = 100;
  c.patience = 100;
  c.validation_fraction = 0.2;
  const auto result = train_matcher(p.graphs, p.targets, p.labels, 2, c);
  const SplitIndices split = split_indices(100, 0.2, c.seed);
  for (Index i : split.validation) {
    const auto ranked = predict_clusters(result.model, p.graphs[i]);
    EXPECT_EQ(p.targets(i, ranked[0].cluster), 1.0) << "instance " << i;
  }
}

TEST(Training, AlphaDecaysAndInferenceUsesHalf) {
  std::mt19937_64 rng(4);
  const auto p = separable(rng, 30);
  MatcherConfig c = small_config();
  c.patience = 100;
  std::vector<double> seen;
  TrainHooks hooks;
  hooks.on_inference_alpha = [&](double a) { seen.push_back(a); };
  const auto result = train_matcher(p.graphs, p.targets, p.labels, 2, c, hooks);
  ASSERT_EQ(result.history.size(), 11u);
  EXPECT_EQ(result.history.front().alpha, 1.0);
  EXPECT_EQ(result.history.back().alpha, 0.0);
  ASSERT_EQ(seen.size(), 11u);
  for (double a : seen) EXPECT_EQ(a, 0.5);
}

TEST(Training, ConventionalOnlyKeepsAlphaAtOne) {
  std::mt19937_64 rng(5);
  const auto p = separable(rng, 30);
  MatcherConfig c = small_config();
  c.rebalance = false;
  const auto result = train_matcher(p.graphs, p.targets, p.labels, 2, c);
  for (const auto& log : result.history) EXPECT_EQ(log.alpha, 1.0);
  EXPECT_EQ(result.model.w_r.norm(), 0.0);
  EXPECT_FALSE(result.model.rebalance_enabled);
}

TEST(Training, EarlyStoppingHonoursPatience) {
  std::mt19937_64 rng(6);
  const auto p = separable(rng, 40);
  MatcherConfig c = small_config();
  c.max_epoch = 60;
  c.patience = 2;
  const auto result = train_matcher(p.graphs, p.targets, p.labels, 2, c);
  const Index last = result.history.back().epoch;
  EXPECT_LE(last - result.best_epoch, 2);
}

TEST(Training, InvalidInputs) {
  EXPECT_THROW(train_matcher({}, Eigen::MatrixXd(0, 2), {}, 2, small_config()), InvalidArgument);
  MatcherConfig c = small_config();
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Checkpoint, ExactRoundTrip) {
  std::mt19937_64 rng(7);
  Matcher m = fixtures::random_matcher(rng, {5, 6, 2, 3});
  m.use_bias = false;
  std::stringstream buf;
  write_matcher(buf, m);
  const Matcher back = read_matcher(buf);
  EXPECT_EQ(back.learn_eps, m.learn_eps);
  EXPECT_EQ(back.use_bias, m.use_bias);
  std::vector<std::vector<double>> a, b;
  visit_parameters(m, [&](std::span<const double> p, bool) { a.emplace_back(p.begin(), p.end()); });
  visit_parameters(back, [&](std::span<const double> p, bool) { b.emplace_back(p.begin(), p.end()); });
  EXPECT_EQ(a, b);
  EXPECT_NE(buf.str().find("validation_alpha 0.5"), std::string::npos);
}

TEST(Checkpoint, RejectsForeignFiles) {
  std::istringstream in("not a checkpoint\n");
  EXPECT_THROW(read_matcher(in), ParseError);
}

TEST(ClusterScores, ExactlyKDotProductsAndRange) {
  std::mt19937_64 rng(8);
  const Matcher m = fixtures::random_matcher(rng, {4, 8, 2, 6});
  const GraphInput g = fixtures::random_graph(rng, 5, 4);
  PredictionCost cost;
  const Eigen::VectorXd s = cluster_scores(m, g, &cost);
  EXPECT_EQ(cost.cluster_dot_products, 6);
  EXPECT_GT(s.minCoeff(), 0.0);
  EXPECT_LT(s.maxCoeff(), 1.0);
}
