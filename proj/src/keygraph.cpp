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

#include "xmtc/keygraph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "xmtc/error.hpp"
#include "xmtc/parallel.hpp"

namespace xmtc {

namespace {

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",     "about", "above", "after", "again", "against", "all",   "am",
      "an",    "and",   "any",   "are",   "as",    "at",      "be",    "because",
      "been",  "before", "being", "below", "between", "both",  "but",   "by",
      "can",   "could", "did",   "do",    "does",  "doing",   "down",  "during",
      "each",  "few",   "for",   "from",  "further", "had",   "has",   "have",
      "having", "he",   "her",   "here",  "hers",  "herself", "him",  "himself",
      "his",   "how",   "i",     "if",    "in",    "into",    "is",    "it",
      "its",   "itself", "just", "me",    "more",  "most",    "my",    "myself",
      "no",    "nor",   "not",   "now",   "of",    "off",     "on",    "once",
      "only",  "or",    "other", "our",   "ours",  "ourselves", "out", "over",
      "own",   "same",  "she",   "should", "so",   "some",    "such",  "than",
      "that",  "the",   "their", "theirs", "them", "themselves", "then", "there",
      "these", "they",  "this",  "those", "through", "to",    "too",   "under",
      "until", "up",    "very",  "was",   "we",    "were",    "what",  "when",
      "where", "which", "while", "who",   "whom",  "why",     "will",  "with",
      "would", "you",   "your",  "yours", "yourself", "yourselves"};
  return words;
}

}  // namespace

bool is_stopword(std::string_view token) { return stopwords().contains(token); }

bool is_content_token(std::string_view token) {
  if (token.empty() || is_stopword(token)) return false;
  return std::all_of(token.begin(), token.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

Eigen::VectorXd textrank_scores(const SparseMatrixD& adjacency, double damping,
                                Index max_iterations, double tolerance) {
  const Index n = adjacency.rows();
  if (n == 0) return {};
  const Eigen::VectorXd out_weight = adjacency * Eigen::VectorXd::Ones(n);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd next(n);
  for (Index it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd spread = Eigen::VectorXd::Zero(n);
    double dangling = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (out_weight[j] > 0.0) spread[j] = s[j] / out_weight[j];
      else dangling += s[j];
    }
    next = adjacency * spread;  // symmetric: column-normalized push
    next.array() += dangling / static_cast<double>(n);
    next = (1.0 - damping) / static_cast<double>(n) + damping * next.array();
    const double change = (next - s).lpNorm<Eigen::Infinity>();
    s.swap(next);
    if (change < tolerance) break;
  }
  return s;
}

std::vector<std::string> textrank_keywords(const Document& doc,
                                           const TextRankOptions& options) {
  if (options.window < 2) throw InvalidArgument("textrank: window must be >= 2");
  if (!(options.damping > 0.0 && options.damping < 1.0))
    throw InvalidArgument("textrank: damping must lie in (0, 1)");
  if (!(options.keep_ratio > 0.0 && options.keep_ratio <= 1.0))
    throw InvalidArgument("textrank: keep_ratio must lie in (0, 1]");

  std::vector<std::string_view> sequence;
  for (const Sentence& s : doc.sentences)
    for (const std::string& t : s)
      if (is_content_token(t)) sequence.push_back(t);
  if (sequence.empty()) return {};

  // Vocabulary ids in lexicographic order keep the graph deterministic.
  std::map<std::string_view, Index> ids;
  for (std::string_view t : sequence) ids.emplace(t, 0);
  std::vector<std::string_view> vocab;
  for (auto& [t, id] : ids) {
    id = static_cast<Index>(vocab.size());
    vocab.push_back(t);
  }
  const auto n = static_cast<Index>(vocab.size());

  std::set<std::pair<Index, Index>> links;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const Index a = ids[sequence[i]];
    const std::size_t end = std::min(sequence.size(), i + static_cast<std::size_t>(options.window));
    for (std::size_t j = i + 1; j < end; ++j) {
      const Index b = ids[sequence[j]];
      if (a != b) links.emplace(std::min(a, b), std::max(a, b));
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& [a, b] : links) {
    triplets.emplace_back(a, b, 1.0);
    triplets.emplace_back(b, a, 1.0);
  }
  SparseMatrixD adjacency(n, n);
  adjacency.setFromTriplets(triplets.begin(), triplets.end());

  const Eigen::VectorXd score = textrank_scores(adjacency, options.damping,
                                                options.max_iterations, options.tolerance);
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return score[a] > score[b]; });
  const auto keep = static_cast<Index>(std::ceil(options.keep_ratio * static_cast<double>(n)));
  std::vector<std::string> out;
  for (Index i = 0; i < std::min(keep, n); ++i) out.emplace_back(vocab[order[i]]);
  return out;
}

KeyGraph build_keygraph(const Document& doc, std::span<const std::string> keywords) {
  KeyGraph g;
  std::unordered_map<std::string_view, Index> vertex_of;
  for (const std::string& k : keywords) {
    if (vertex_of.emplace(k, static_cast<Index>(g.vertices.size())).second)
      g.vertices.push_back(k);
  }
  g.empty_vertex = static_cast<Index>(g.vertices.size());
  g.vertices.emplace_back();
  g.vertex_sentences.resize(g.vertices.size());
  g.sentence_vertices.resize(doc.sentences.size());

  std::map<std::pair<Index, Index>, Index> weights;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    std::set<Index> hit;
    for (const std::string& t : doc.sentences[s]) {
      const auto it = vertex_of.find(t);
      if (it != vertex_of.end()) hit.insert(it->second);
    }
    if (hit.empty()) hit.insert(g.empty_vertex);
    g.sentence_vertices[s].assign(hit.begin(), hit.end());
    for (Index v : hit) g.vertex_sentences[v].push_back(static_cast<Index>(s));
    for (auto a = hit.begin(); a != hit.end(); ++a)
      for (auto b = std::next(a); b != hit.end(); ++b) ++weights[{*a, *b}];
  }
  for (const auto& [ij, w] : weights) g.edges.push_back({ij.first, ij.second, w});
  return g;
}

SparseMatrixD KeyGraph::adjacency(bool weighted) const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const WeightedEdge& e : edges) {
    const double w = weighted ? static_cast<double>(e.weight) : 1.0;
    triplets.emplace_back(e.source, e.target, w);
    triplets.emplace_back(e.target, e.source, w);
  }
  SparseMatrixD a(num_vertices(), num_vertices());
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

Eigen::MatrixXd init_vertex_features(const KeyGraph& graph, const Document& doc,
                                     const EmbeddingProvider& provider) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(graph.num_vertices(), provider.dimension());
  std::vector<Eigen::VectorXd> sentence_embedding(doc.sentences.size());
  for (std::size_t s = 0; s < doc.sentences.size(); ++s)
    sentence_embedding[s] = provider.embed_sentence(doc, s);
  for (Index v = 0; v < graph.num_vertices(); ++v)
    for (Index s : graph.vertex_sentences[v]) h.row(v) += sentence_embedding[s].transpose();
  return h;
}

void write_keygraph(std::ostream& out, const KeyGraph& graph) {
  out << "vertices " << graph.num_vertices() << '\n';
  for (Index v = 0; v < graph.num_vertices(); ++v)
    out << v << '\t' << (v == graph.empty_vertex ? "<empty>" : graph.vertices[v]) << '\n';
  out << "edges " << graph.edges.size() << '\n';
  for (const WeightedEdge& e : graph.edges)
    out << e.source << ' ' << e.target << ' ' << e.weight << '\n';
}

GraphInput make_graph_input(const Document& doc, const EmbeddingProvider& provider,
                            const GraphBuildOptions& options) {
  const auto keywords = textrank_keywords(doc, options.textrank);
  const KeyGraph g = build_keygraph(doc, keywords);
  return {g.adjacency(options.weighted_edges), init_vertex_features(g, doc, provider)};
}

std::vector<GraphInput> make_graph_inputs(const TextCorpus& corpus,
                                          const EmbeddingProvider& provider,
                                          const GraphBuildOptions& options) {
  std::vector<GraphInput> out(corpus.documents.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = make_graph_input(corpus.documents[i], provider, options);
  });
  return out;
}

}  // namespace xmtc
