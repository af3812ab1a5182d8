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
#include <string>
#include <vector>

#include "xmtc/corpus.hpp"
#include "xmtc/types.hpp"

namespace xmtc {

/// Knobs of the planted-cluster generator.
struct SynthSpec {
  Index num_labels = 300;
  Index num_clusters = 6;
  Index num_features = 2048;
  Index num_instances = 3000;
  double exponent = 1.0;        // label frequency of rank r is proportional to r^-exponent
  double noise_rate = 0.05;     // share of off-topic tokens
  std::uint64_t seed = 42;

  double extra_labels = 1.0;    // mean number of additional same-cluster labels
  double secondary_rate = 0.0;  // chance of one extra label from another cluster
  Index sentences = 5;
  Index sentence_length = 8;
  Index cluster_vocabulary = 20;  // topical tokens per cluster
  Index label_vocabulary = 3;     // tokens specific to one label
  Index noise_vocabulary = 200;
  bool interleave_clusters = false;  // rank r -> cluster r mod K instead of rank blocks

  void validate() const;
};

struct SynthData {
  Dataset dataset;
  TextCorpus corpus;
  std::vector<Index> true_clusters;  // label -> planted cluster
  Eigen::VectorXd label_weights;     // target label distribution (sums to 1)
};

/// Label l has frequency rank l + 1. Each instance draws a first label from
/// the power law, which fixes its primary cluster, then Poisson(extra_labels)
/// further labels from that cluster in proportion to their weights. Text is
/// made of letter-only tokens: topical tokens of the primary cluster,
/// label-specific tokens, and noise. Features are l2-normalized tf-idf
/// over token ids folded into num_features columns.
SynthData generate(const SynthSpec& spec);

/// Token text for vocabulary id `id`: "zq" followed by base-26 letters.
std::string synth_token(Index id);

}  // namespace xmtc
