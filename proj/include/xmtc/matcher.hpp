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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xmtc/gin.hpp"
#include "xmtc/keygraph.hpp"
#include "xmtc/labelgraph.hpp"
#include "xmtc/types.hpp"

namespace xmtc {

using Matcher = MatcherModel<double>;

/// Both branches are weighted equally whenever the matcher scores
/// clusters outside of a training step.
inline constexpr double kInferenceAlpha = 0.5;

struct MatcherConfig {
  Index hidden_dim = 64;
  Index num_layers = 2;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double warmup_fraction = 0.1;
  Index max_epoch = 30;  // t_max; epochs run for t = 0..t_max
  Index batch_size = 32;
  Index patience = 10;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
  bool rebalance = true;
  bool learn_eps = false;
  bool classifier_bias = true;

  void validate() const;
};

struct EpochLog {
  Index epoch = 0;
  double alpha = 0.0;
  double train_loss = 0.0;
  double validation_loss = 0.0;  // NaN without a validation split
  bool improved = false;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
  /// Receives the mixing factor used whenever the loop scores held-out data.
  std::function<void(double)> on_inference_alpha;
};

struct TrainResult {
  Matcher model;
  std::vector<EpochLog> history;
  Index best_epoch = 0;
};

/// Momentum SGD over the trainable parameter blocks.
class SgdMomentum {
 public:
  SgdMomentum(const Matcher& model, double momentum);
  void step(Matcher& model, const Matcher& grad, double learning_rate);

 private:
  Matcher velocity_;
  double momentum_;
};

/// Mean pair loss over a batch; accumulates the mean gradient into `grad`
/// when non-null. Pair i couples conventional instance `uniform[i]` with
/// re-balance instance `reversed[i]`.
double batch_loss_and_gradient(const Matcher& model, std::span<const GraphInput> graphs,
                               const Eigen::MatrixXd& targets,
                               std::span<const Index> uniform,
                               std::span<const Index> reversed, double alpha, Matcher* grad);

/// Mean held-out loss with both branches on the same graph.
double validation_loss(const Matcher& model, std::span<const GraphInput> graphs,
                       const Eigen::MatrixXd& targets, std::span<const Index> rows);

/// `targets` row i is the cluster indicator vector of graph i.
TrainResult train_matcher(std::span<const GraphInput> graphs, const Eigen::MatrixXd& targets,
                          std::span<const LabelSet> labels, Index num_labels,
                          const MatcherConfig& config, const TrainHooks& hooks = {});

/// Cluster probabilities for one document graph at the inference mix.
/// Each cluster costs one dot product over the concatenated branch readouts.
Eigen::VectorXd cluster_scores(const Matcher& model, const GraphInput& graph,
                               PredictionCost* cost = nullptr);

/// Descending by score, ties by lower cluster id.
std::vector<ScoredCluster> rank_clusters(const Eigen::VectorXd& scores);

std::vector<ScoredCluster> predict_clusters(const Matcher& model, const GraphInput& graph,
                                            PredictionCost* cost = nullptr);

void write_matcher(std::ostream& out, const Matcher& model);
Matcher read_matcher(std::istream& in);
void save_matcher(const std::string& path, const Matcher& model);
Matcher load_matcher(const std::string& path);

}  // namespace xmtc
