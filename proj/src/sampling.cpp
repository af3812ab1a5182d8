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

#include "xmtc/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "xmtc/corpus.hpp"
#include "xmtc/error.hpp"

namespace xmtc {

std::vector<Index> uniform_epoch(Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("uniform_epoch: empty dataset");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

ReversedSampler::ReversedSampler(std::span<const LabelSet> labels, Index num_labels,
                                 std::uint64_t seed)
    : counts_(label_frequencies(labels, num_labels)),
      probabilities_(Eigen::VectorXd::Zero(num_labels)),
      instances_(static_cast<std::size_t>(num_labels)),
      rng_(seed) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (LabelId l : labels[i]) instances_[l].push_back(static_cast<Index>(i));
  const Index n_max = counts_.size() > 0 ? counts_.maxCoeff() : 0;
  if (n_max == 0) throw InvalidArgument("ReversedSampler: no label has any instance");

  std::vector<double> weights;
  for (Index l = 0; l < num_labels; ++l) {
    if (counts_[l] == 0) continue;
    const double w = static_cast<double>(n_max) / static_cast<double>(counts_[l]);
    probabilities_[l] = w;
    drawable_.push_back(static_cast<LabelId>(l));
    weights.push_back(w);
  }
  probabilities_ /= probabilities_.sum();
  label_dist_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

LabelId ReversedSampler::draw_label() { return drawable_[label_dist_(rng_)]; }

Index ReversedSampler::draw() {
  const auto& pool = instances_[draw_label()];
  return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng_)];
}

std::vector<PairedBatch> paired_batches(std::span<const Index> uniform,
                                        ReversedSampler& sampler, Index batch_size) {
  if (batch_size < 1) throw InvalidArgument("paired_batches: batch size must be >= 1");
  std::vector<PairedBatch> out;
  const auto b = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < uniform.size(); start += b) {
    PairedBatch batch;
    const std::size_t end = std::min(uniform.size(), start + b);
    batch.uniform.assign(uniform.begin() + static_cast<std::ptrdiff_t>(start),
                         uniform.begin() + static_cast<std::ptrdiff_t>(end));
    batch.reversed.reserve(batch.uniform.size());
    for (std::size_t i = start; i < end; ++i) batch.reversed.push_back(sampler.draw());
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace xmtc
