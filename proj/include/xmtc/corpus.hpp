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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xmtc/types.hpp"

namespace xmtc {

/// Sparse-feature multi-label dataset. Row i of `features` and
/// `labels[i]` describe the same instance.
struct Dataset {
  SparseRowMatrix features;
  std::vector<LabelSet> labels;
  Index num_labels = 0;

  Index size() const { return static_cast<Index>(labels.size()); }
  Index num_features() const { return features.cols(); }
  bool empty() const { return labels.empty(); }

  FeatureVector instance(Index i) const;

  /// Rows `rows` (in the given order) as a new dataset with the same L, d.
  Dataset subset(std::span<const Index> rows) const;

  /// Throws BoundsError/FormatError when an invariant is broken.
  void validate() const;

  friend bool operator==(const Dataset& a, const Dataset& b);
};

/// Reads the XMC repository sparse format:
///
///   num_instances num_features num_labels
///   l1,l2,... f1:v1 f2:v2 ...
///
/// Label ids are sorted and deduplicated. Throws ParseError (with line
/// number) for malformed text and BoundsError for out-of-range indices.
Dataset parse_xmc(const std::filesystem::path& path);
Dataset read_xmc(std::istream& in);
void write_xmc(std::ostream& out, const Dataset& ds);
void write_xmc(const std::filesystem::path& path, const Dataset& ds);

struct DatasetStats {
  Index n_train = 0;
  Index n_test = 0;
  Index num_features = 0;
  Index num_labels = 0;
  double avg_labels_per_instance = 0.0;   // over train instances
  double avg_instances_per_label = 0.0;   // over all L labels
};

DatasetStats dataset_stats(const Dataset& train, const Dataset& test);

/// n_l = number of instances carrying label l.
Counts label_frequencies(const Dataset& ds);
Counts label_frequencies(std::span<const LabelSet> labels, Index num_labels);

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> validation;
};

/// Seeded random partition of [0, n); round(fraction * n) rows go to the
/// validation side. Both sides must be non-empty.
SplitIndices split_indices(Index n, double val_fraction, std::uint64_t seed);

std::pair<Dataset, Dataset> split(const Dataset& ds, double val_fraction,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Raw text

using Sentence = std::vector<std::string>;

struct Document {
  std::string id;
  std::vector<Sentence> sentences;

  /// All tokens in reading order.
  std::vector<std::string> tokens() const;
  friend bool operator==(const Document&, const Document&) = default;
};

struct TextCorpus {
  std::vector<Document> documents;

  Index size() const { return static_cast<Index>(documents.size()); }
  TextCorpus subset(std::span<const Index> rows) const;
  friend bool operator==(const TextCorpus&, const TextCorpus&) = default;
};

/// Lowercases and splits on runs of non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view text);

/// One document per line, sentences separated by tabs. Document ids are
/// the zero-based line numbers. Sentences with no tokens are dropped.
TextCorpus parse_text_corpus(const std::filesystem::path& path);
TextCorpus read_text_corpus(std::istream& in);
void write_text_corpus(std::ostream& out, const TextCorpus& corpus);
void write_text_corpus(const std::filesystem::path& path,
                       const TextCorpus& corpus);

}  // namespace xmtc
