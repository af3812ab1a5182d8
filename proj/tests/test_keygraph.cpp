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

#include <algorithm>
#include <random>

#include "xmtc/embed.hpp"
#include "xmtc/error.hpp"
#include "xmtc/keygraph.hpp"
#include "xmtc/synth.hpp"

using namespace xmtc;

namespace {

Document doc_of(std::vector<Sentence> sentences) { return {"d", std::move(sentences)}; }

// Dense power iteration with column-normalized weights.
Eigen::VectorXd textrank_oracle(const Eigen::MatrixXd& w, double d, int iterations) {
  const Index n = w.rows();
  Eigen::MatrixXd m = w;
  for (Index j = 0; j < n; ++j) m.col(j) /= w.col(j).sum();
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int i = 0; i < iterations; ++i)
    s = Eigen::VectorXd::Constant(n, (1.0 - d) / static_cast<double>(n)) + d * m * s;
  return s;
}

}  // namespace

TEST(TextRank, SymmetricPairScoresEqually) {
  TextRankOptions opt;
  opt.keep_ratio = 1.0;
  const auto kw = textrank_keywords(doc_of({{"alpha", "beta"}, {"beta", "alpha"}}), opt);
  EXPECT_EQ(kw, (std::vector<std::string>{"alpha", "beta"}));
  SparseMatrixD a(2, 2);
  a.insert(0, 1) = 1.0;
  a.insert(1, 0) = 1.0;
  const Eigen::VectorXd s = textrank_scores(a, 0.85, 50, 1e-6);
  EXPECT_EQ(s[0], s[1]);
}

TEST(TextRank, EmptyDocumentHasNoKeywords) {
  EXPECT_TRUE(textrank_keywords(doc_of({})).empty());
  EXPECT_TRUE(textrank_keywords(doc_of({{"the", "of", "and"}})).empty());
}

TEST(TextRank, StarHubScoresHighest) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
  for (Index s = 1; s < 5; ++s) w(0, s) = w(s, 0) = 1.0;
  const SparseMatrixD a = w.sparseView();
  const Eigen::VectorXd s = textrank_scores(a, 0.85, 200, 1e-15);
  for (Index i = 1; i < 5; ++i) EXPECT_GT(s[0], s[i]);
  EXPECT_TRUE(s.isApprox(textrank_oracle(w, 0.85, 200), 1e-10));

  TextRankOptions opt;
  opt.window = 2;
  opt.keep_ratio = 0.2;
  const auto kw = textrank_keywords(
      doc_of({{"hub", "north", "hub", "south"}, {"hub", "east", "hub", "west"}}), opt);
  EXPECT_EQ(kw, std::vector<std::string>{"hub"});
}

TEST(TextRank, TiesBrokenLexicographically) {
  TextRankOptions opt;
  opt.keep_ratio = 0.5;
  // A 4-cycle: every token has the same score.
  const auto kw = textrank_keywords(doc_of({{"delta", "alpha"}, {"alpha", "gamma"},
                                            {"gamma", "beta"}, {"beta", "delta"}}),
                                    {2, 0.85, 50, 0.5, 1e-6});
  EXPECT_EQ(kw, (std::vector<std::string>{"alpha", "beta"}));
}

TEST(TextRank, InvalidOptions) {
  const Document d = doc_of({{"alpha"}});
  EXPECT_THROW(textrank_keywords(d, {1, 0.85, 50, 0.3, 1e-6}), InvalidArgument);
  EXPECT_THROW(textrank_keywords(d, {4, 1.0, 50, 0.3, 1e-6}), InvalidArgument);
  EXPECT_THROW(textrank_keywords(d, {4, 0.85, 50, 0.0, 1e-6}), InvalidArgument);
}

TEST(KeyGraph, HandConstruction) {
  const Document d = doc_of({{"k1", "k2"}, {"k2"}, {"other"}});
  const std::vector<std::string> kw = {"k1", "k2"};
  const KeyGraph g = build_keygraph(d, kw);
  ASSERT_EQ(g.num_vertices(), 3);
  EXPECT_EQ(g.empty_vertex, 2);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0], (WeightedEdge{0, 1, 1}));
  EXPECT_EQ(g.sentence_vertices[2], std::vector<Index>{2});
  EXPECT_EQ(g.vertex_sentences[1], (std::vector<Index>{0, 1}));
}

TEST(KeyGraph, NoKeywordsGivesSingleEmptyVertex) {
  const KeyGraph g = build_keygraph(doc_of({{"a"}, {"b"}}), std::vector<std::string>{});
  EXPECT_EQ(g.num_vertices(), 1);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.vertex_sentences[0], (std::vector<Index>{0, 1}));
}

TEST(KeyGraph, WeightsCountSharedSentences) {
  const std::vector<std::string> kw = {"k1", "k2"};
  const KeyGraph g = build_keygraph(doc_of({{"k1", "k2"}, {"k2", "k1", "k1"}}), kw);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].weight, 2);
  EXPECT_EQ(g.adjacency(true).coeff(0, 1), 2.0);
  EXPECT_EQ(g.adjacency(false).coeff(1, 0), 1.0);
}

TEST(KeyGraph, StructuralInvariantsOnSyntheticDocuments) {
  SynthSpec spec;
  spec.num_labels = 30;
  spec.num_clusters = 3;
  spec.num_instances = 40;
  const TextCorpus corpus = generate(spec).corpus;
  for (const Document& d : corpus.documents) {
    const auto kw = textrank_keywords(d);
    const KeyGraph g = build_keygraph(d, kw);
    for (std::size_t s = 0; s < d.sentences.size(); ++s) {
      EXPECT_FALSE(g.sentence_vertices[s].empty());
      for (Index v : g.sentence_vertices[s]) {
        const auto& back = g.vertex_sentences[v];
        EXPECT_EQ(std::count(back.begin(), back.end(), static_cast<Index>(s)), 1);
      }
    }
    for (const auto& e : g.edges) {
      EXPECT_LT(e.source, e.target);
      EXPECT_GT(e.weight, 0);
      EXPECT_NE(e.source, g.empty_vertex);
      EXPECT_NE(e.target, g.empty_vertex);
      EXPECT_LE(e.weight, static_cast<Index>(std::min(g.vertex_sentences[e.source].size(),
                                                      g.vertex_sentences[e.target].size())));
    }
  }
}

TEST(VertexFeatures, SumOfAttachedSentenceEmbeddings) {
  const HashEmbedding provider(16, 3);
  const Document d = doc_of({{"k1", "x"}, {"k1", "y"}, {"k2", "z"}});
  const std::vector<std::string> kw = {"k1", "k2"};
  const KeyGraph g = build_keygraph(d, kw);
  const Eigen::MatrixXd h = init_vertex_features(g, d, provider);
  const Eigen::VectorXd s0 = provider.embed(d.sentences[0]);
  const Eigen::VectorXd s1 = provider.embed(d.sentences[1]);
  const Eigen::VectorXd s2 = provider.embed(d.sentences[2]);
  EXPECT_TRUE(h.row(0).transpose().isApprox(s0 + s1));
  EXPECT_EQ(h.row(1).transpose(), s2);
  EXPECT_EQ(h.row(g.empty_vertex).norm(), 0.0);
}

TEST(GraphInput, ShapesAgreeOnSyntheticText) {
  SynthSpec spec;
  spec.num_labels = 12;
  spec.num_clusters = 2;
  spec.num_instances = 20;
  spec.noise_rate = 0.0;
  const TextCorpus corpus = generate(spec).corpus;
  for (const Document& d : corpus.documents) {
    const GraphInput in = make_graph_input(d, HashEmbedding(8, 1));
    EXPECT_GE(in.num_vertices(), 2);
    EXPECT_EQ(in.adjacency.rows(), in.num_vertices());
  }
}
