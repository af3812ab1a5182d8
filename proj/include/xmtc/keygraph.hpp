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

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "xmtc/corpus.hpp"
#include "xmtc/embed.hpp"
#include "xmtc/types.hpp"

namespace xmtc {

struct TextRankOptions {
  Index window = 4;
  double damping = 0.85;
  Index max_iterations = 50;
  double keep_ratio = 0.3;
  double tolerance = 1e-6;
};

bool is_stopword(std::string_view token);

/// Non-stopword tokens made only of letters.
bool is_content_token(std::string_view token);

/// Power iteration s <- (1 - d)/n + d * W s on an undirected graph, with W
/// the column-normalized adjacency. Dangling nodes spread their score
/// uniformly. Stops after `max_iterations` rounds or when the L-inf change
/// drops below `tolerance`.
Eigen::VectorXd textrank_scores(const SparseMatrixD& adjacency, double damping,
                                Index max_iterations, double tolerance);

/// Top ceil(keep_ratio * n) of the n distinct content tokens by TextRank
/// score over a sliding co-occurrence window; ties broken lexicographically.
std::vector<std::string> textrank_keywords(const Document& doc,
                                           const TextRankOptions& options = {});

struct WeightedEdge {
  Index source = 0;
  Index target = 0;
  Index weight = 0;  // shared-sentence count
  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Keyword co-occurrence graph of one document. Vertices are the keywords
/// followed by one empty vertex collecting sentences with no keyword. The
/// empty vertex has no edges.
struct KeyGraph {
  std::vector<std::string> vertices;
  Index empty_vertex = 0;
  std::vector<WeightedEdge> edges;                  // source < target
  std::vector<std::vector<Index>> sentence_vertices;  // per sentence
  std::vector<std::vector<Index>> vertex_sentences;   // per vertex

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  /// Symmetric V x V adjacency with unit (or shared-sentence) weights.
  SparseMatrixD adjacency(bool weighted = false) const;
};

KeyGraph build_keygraph(const Document& doc, std::span<const std::string> keywords);

/// Row v = sum of provider sentence embeddings attached to vertex v.
Eigen::MatrixXd init_vertex_features(const KeyGraph& graph, const Document& doc,
                                     const EmbeddingProvider& provider);

void write_keygraph(std::ostream& out, const KeyGraph& graph);

/// Matcher input: vertex features plus adjacency.
struct GraphInput {
  SparseMatrixD adjacency;
  Eigen::MatrixXd features;

  Index num_vertices() const { return features.rows(); }
};

struct GraphBuildOptions {
  TextRankOptions textrank;
  bool weighted_edges = false;
};

GraphInput make_graph_input(const Document& doc, const EmbeddingProvider& provider,
                            const GraphBuildOptions& options = {});

std::vector<GraphInput> make_graph_inputs(const TextCorpus& corpus,
                                          const EmbeddingProvider& provider,
                                          const GraphBuildOptions& options = {});

}  // namespace xmtc
