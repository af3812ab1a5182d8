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

#include "xmtc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "xmtc/error.hpp"

namespace xmtc {

void SynthSpec::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw InvalidArgument(std::string("synth.") + field + ": " + what);
  };
  require(num_labels >= 1, "labels", "must be >= 1");
  require(num_clusters >= 1 && num_clusters <= num_labels, "clusters", "must lie in [1, labels]");
  require(num_features >= 1, "features", "must be >= 1");
  require(num_instances >= 1, "instances", "must be >= 1");
  require(exponent >= 0.0, "exponent", "must be >= 0");
  require(noise_rate >= 0.0 && noise_rate <= 1.0, "noise", "must lie in [0, 1]");
  require(extra_labels >= 0.0, "extra_labels", "must be >= 0");
  require(secondary_rate >= 0.0 && secondary_rate <= 1.0, "secondary_rate", "must lie in [0, 1]");
  require(secondary_rate == 0.0 || num_clusters >= 2, "secondary_rate", "needs at least two clusters");
  require(sentences >= 1 && sentence_length >= 1, "sentences", "must be >= 1");
  require(cluster_vocabulary >= 1 && label_vocabulary >= 1, "vocabulary", "must be >= 1");
  require(noise_vocabulary >= 1 || noise_rate == 0.0, "noise_vocabulary", "must be >= 1 when noise > 0");
}

std::string synth_token(Index id) {
  std::string s;
  do {
    s.push_back(static_cast<char>('a' + id % 26));
    id /= 26;
  } while (id > 0);
  std::reverse(s.begin(), s.end());
  return "zq" + s;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const Index L = spec.num_labels, K = spec.num_clusters;
  std::mt19937_64 rng(spec.seed);

  SynthData out;
  out.label_weights.resize(L);
  for (Index l = 0; l < L; ++l)
    out.label_weights[l] = std::pow(static_cast<double>(l + 1), -spec.exponent);
  out.label_weights /= out.label_weights.sum();

  out.true_clusters.resize(static_cast<std::size_t>(L));
  std::vector<std::vector<LabelId>> members(static_cast<std::size_t>(K));
  for (Index l = 0; l < L; ++l) {
    const Index c = spec.interleave_clusters ? l % K : l * K / L;
    out.true_clusters[static_cast<std::size_t>(l)] = c;
    members[static_cast<std::size_t>(c)].push_back(static_cast<LabelId>(l));
  }

  // Vocabulary layout: cluster topics, then label-specific, then noise.
  const Index label_base = K * spec.cluster_vocabulary;
  const Index noise_base = label_base + L * spec.label_vocabulary;

  std::discrete_distribution<Index> first_label(out.label_weights.data(),
                                                out.label_weights.data() + L);
  std::vector<std::discrete_distribution<std::size_t>> within(static_cast<std::size_t>(K));
  for (Index c = 0; c < K; ++c) {
    std::vector<double> w;
    for (LabelId l : members[static_cast<std::size_t>(c)]) w.push_back(out.label_weights[l]);
    within[static_cast<std::size_t>(c)] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  std::poisson_distribution<Index> extra(spec.extra_labels > 0.0 ? spec.extra_labels : 1.0);
  std::bernoulli_distribution noisy(spec.noise_rate), secondary(spec.secondary_rate),
      topical(0.5);
  std::uniform_int_distribution<Index> cluster_word(0, spec.cluster_vocabulary - 1),
      label_word(0, spec.label_vocabulary - 1),
      noise_word(0, std::max<Index>(spec.noise_vocabulary, 1) - 1);

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Index> df(static_cast<std::size_t>(spec.num_features), 0);
  std::vector<std::map<Index, double>> tf(static_cast<std::size_t>(spec.num_instances));
  out.dataset.num_labels = L;
  out.dataset.labels.resize(static_cast<std::size_t>(spec.num_instances));

  for (Index i = 0; i < spec.num_instances; ++i) {
    const auto first = static_cast<LabelId>(first_label(rng));
    const Index c = out.true_clusters[static_cast<std::size_t>(first)];
    const auto& pool = members[static_cast<std::size_t>(c)];
    LabelSet primary{first};
    const Index want = std::min<Index>(spec.extra_labels > 0.0 ? extra(rng) : 0,
                                       static_cast<Index>(pool.size()) - 1);
    for (Index tries = 0; static_cast<Index>(primary.size()) < want + 1 && tries < 100 * (want + 1); ++tries) {
      const LabelId l = pool[within[static_cast<std::size_t>(c)](rng)];
      if (std::find(primary.begin(), primary.end(), l) == primary.end()) primary.push_back(l);
    }
    LabelId other = -1;
    Index other_cluster = -1;
    if (spec.secondary_rate > 0.0 && secondary(rng)) {
      for (;;) {
        const auto l = static_cast<LabelId>(first_label(rng));
        if (out.true_clusters[static_cast<std::size_t>(l)] != c) {
          other = l;
          other_cluster = out.true_clusters[static_cast<std::size_t>(l)];
          break;
        }
      }
    }

    // Secondary topic fills one sentence in every `sentences` rounds.
    Document doc;
    doc.id = std::to_string(i);
    for (Index s = 0; s < spec.sentences; ++s) {
      const bool side = other >= 0 && s == spec.sentences - 1;
      const Index topic = side ? other_cluster : c;
      Sentence sentence;
      for (Index t = 0; t < spec.sentence_length; ++t) {
        Index id;
        if (noisy(rng)) {
          id = noise_base + noise_word(rng);
        } else if (topical(rng)) {
          id = topic * spec.cluster_vocabulary + cluster_word(rng);
        } else {
          const LabelId l = side ? other
                                 : primary[std::uniform_int_distribution<std::size_t>(
                                       0, primary.size() - 1)(rng)];
          id = label_base + static_cast<Index>(l) * spec.label_vocabulary + label_word(rng);
        }
        sentence.push_back(synth_token(id));
        tf[static_cast<std::size_t>(i)][id % spec.num_features] += 1.0;
      }
      doc.sentences.push_back(std::move(sentence));
    }
    out.corpus.documents.push_back(std::move(doc));

    if (other >= 0) primary.push_back(other);
    std::sort(primary.begin(), primary.end());
    out.dataset.labels[static_cast<std::size_t>(i)] = std::move(primary);
    for (const auto& [j, _] : tf[static_cast<std::size_t>(i)]) ++df[static_cast<std::size_t>(j)];
  }

  const auto n = static_cast<double>(spec.num_instances);
  for (Index i = 0; i < spec.num_instances; ++i) {
    double norm2 = 0.0;
    std::vector<std::pair<Index, double>> row;
    for (const auto& [j, count] : tf[static_cast<std::size_t>(i)]) {
      const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[static_cast<std::size_t>(j)]))) + 1.0;
      row.emplace_back(j, count * idf);
      norm2 += count * idf * count * idf;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (const auto& [j, v] : row) triplets.emplace_back(i, j, v * inv);
  }
  out.dataset.features = SparseRowMatrix(spec.num_instances, spec.num_features);
  out.dataset.features.setFromTriplets(triplets.begin(), triplets.end());
  out.dataset.features.makeCompressed();
  return out;
}

}  // namespace xmtc
