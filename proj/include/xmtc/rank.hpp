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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xmtc/corpus.hpp"
#include "xmtc/labelgraph.hpp"
#include "xmtc/types.hpp"

namespace xmtc {

struct LogisticOptions {
  double l2 = 1.0;             // penalty on the weights; the bias is unpenalized
  double tolerance = 1e-5;     // stop when the gradient norm drops below this
  Index max_iterations = 500;  // Newton steps
};

struct LogisticModel {
  FeatureVector weights;
  double bias = 0.0;
  Index iterations = 0;
  double gradient_norm = 0.0;
};

/// L2-regularized logistic regression on rows of `x` minimized by
/// truncated Newton (conjugate gradient inner solves, Armijo backtracking).
/// The objective is the summed log-loss plus l2/2 * |w|^2.
LogisticModel train_logistic(const SparseRowMatrix& x, std::span<const char> positive,
                             const LogisticOptions& options = {});

/// Gradient norm of the objective above at (weights, bias).
double logistic_gradient_norm(const SparseRowMatrix& x, std::span<const char> positive,
                              const FeatureVector& weights, double bias, double l2);

struct LabelClassifier {
  bool trained = false;
  FeatureVector weights;
  double bias = 0.0;
};

struct LabelClassifiers {
  Index num_features = 0;
  std::vector<LabelClassifier> labels;

  Index num_labels() const { return static_cast<Index>(labels.size()); }
  /// sigma(w^T x + b); 0 for labels that were never trained.
  double probability(LabelId label, const FeatureVector& x) const;
};

/// One classifier per label with at least one training instance. The
/// training pool of a label is every instance whose cluster-target vector
/// has a 1 for the label's cluster; positives are those carrying the label.
/// An empty negative pool yields a bias-only model at the smoothed prior.
LabelClassifiers train_label_classifiers(const Dataset& ds, const LabelClusters& clusters,
                                         const LogisticOptions& options = {});

enum class ScoreMode {
  mixture,  // g_hat(cluster) * classifier probability
  gate,     // classifier probability inside the selected clusters
};

/// Scores the labels of the top_b highest-scoring clusters. Ranked by
/// descending score, ties by lower label id. Each classifier evaluation is
/// added to `cost` when given.
std::vector<ScoredLabel> score_labels(const FeatureVector& x,
                                      const Eigen::VectorXd& cluster_scores,
                                      const LabelClassifiers& classifiers,
                                      const LabelClusters& clusters, Index top_b,
                                      ScoreMode mode = ScoreMode::mixture,
                                      PredictionCost* cost = nullptr);

/// First k entries of score_labels.
std::vector<ScoredLabel> top_k(std::vector<ScoredLabel> ranked, Index k);

FeatureVector instance_vector(const SparseRowMatrix& features, Index row);

/// Text store: "labels features" header, then "label feature value"
/// triplets per trained label with feature -1 holding the bias.
void write_classifiers(std::ostream& out, const LabelClassifiers& classifiers);
LabelClassifiers read_classifiers(std::istream& in);

}  // namespace xmtc
