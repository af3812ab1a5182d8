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
#include <random>
#include <span>
#include <vector>

#include "xmtc/types.hpp"

namespace xmtc {

/// Seed-deterministic permutation of 0..n-1.
std::vector<Index> uniform_epoch(Index n, std::uint64_t seed);

/// Draws a label with probability inversely proportional to its instance
/// count, then an instance carrying that label uniformly with replacement.
/// Labels without instances get probability 0.
class ReversedSampler {
 public:
  ReversedSampler(std::span<const LabelSet> labels, Index num_labels, std::uint64_t seed);

  /// p_l = w_l / sum(w), w_l = n_max / n_l.
  const Eigen::VectorXd& probabilities() const { return probabilities_; }
  const Counts& counts() const { return counts_; }

  LabelId draw_label();
  Index draw();

 private:
  Counts counts_;
  Eigen::VectorXd probabilities_;
  std::vector<LabelId> drawable_;
  std::vector<std::vector<Index>> instances_;  // per label
  std::discrete_distribution<std::size_t> label_dist_;
  std::mt19937_64 rng_;
};

struct PairedBatch {
  std::vector<Index> uniform;   // conventional branch
  std::vector<Index> reversed;  // re-balance branch
};

/// One epoch of paired batches: ceil(N / batch_size) batches covering the
/// uniform permutation exactly once, each uniform index paired with an
/// independent reversed draw.
std::vector<PairedBatch> paired_batches(std::span<const Index> uniform,
                                        ReversedSampler& sampler, Index batch_size);

}  // namespace xmtc
