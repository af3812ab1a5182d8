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
#include <cmath>
#include <random>
#include <sstream>

#include "xmtc/embed.hpp"
#include "xmtc/error.hpp"

using namespace xmtc;

namespace {

std::vector<std::string> random_words(std::mt19937_64& rng, int count, const std::string& prefix) {
  std::uniform_int_distribution<int> letter('a', 'z');
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    std::string w = prefix;
    for (int c = 0; c < 6; ++c) w.push_back(static_cast<char>(letter(rng)));
    out.push_back(w);
  }
  return out;
}

Document doc_of(std::string id, std::vector<Sentence> sentences) {
  return {std::move(id), std::move(sentences)};
}

}  // namespace

TEST(HashEmbed, EmptyInputIsZero) {
  const Eigen::VectorXd v = hash_embed({}, 16, 1);
  EXPECT_EQ(v.size(), 16);
  EXPECT_EQ(v.norm(), 0.0);
}

TEST(HashEmbed, DeterministicAndUnitNorm) {
  const std::vector<std::string> tokens = {"graph", "label", "cluster", "graph"};
  const Eigen::VectorXd a = hash_embed(tokens, 64, 9);
  const Eigen::VectorXd b = hash_embed(tokens, 64, 9);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_NE(a, hash_embed(tokens, 64, 10));
}

TEST(HashEmbed, OrderInsensitive) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto tokens = random_words(rng, 12, "");
    tokens.push_back(tokens[0]);
    const Eigen::VectorXd a = hash_embed(tokens, 32, 3);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    EXPECT_EQ(a, hash_embed(tokens, 32, 3));
  }
}

TEST(HashEmbed, DimensionMustBePositive) {
  EXPECT_THROW(hash_embed({}, 0, 1), InvalidArgument);
}

TEST(Tfidf, IdfBoundaryValues) {
  TextCorpus corpus;
  corpus.documents = {doc_of("0", {{"common", "rare"}}), doc_of("1", {{"common"}}),
                      doc_of("2", {{"common", "other"}})};
  const auto tfidf = TfidfEmbedding::fit(corpus, 32, 1);
  EXPECT_DOUBLE_EQ(tfidf.idf("common"), 1.0);
  EXPECT_NEAR(tfidf.idf("rare"), std::log(2.0) + 1.0, 1e-12);
  EXPECT_NEAR(tfidf.idf("rare"), 1.6931, 1e-4);
}

TEST(Tfidf, EmptyCorpusIsAnError) {
  EXPECT_THROW(TfidfEmbedding::fit(TextCorpus{}, 8, 1), InvalidArgument);
}

TEST(Tfidf, DisjointVocabulariesAreNearlyOrthogonal) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = random_words(rng, 20, "a");
    const auto b = random_words(rng, 20, "b");
    TextCorpus corpus;
    corpus.documents = {doc_of("0", {a}), doc_of("1", {b})};
    const auto tfidf = TfidfEmbedding::fit(corpus, 256, static_cast<std::uint64_t>(rep));
    const double cosine = tfidf.embed(a).dot(tfidf.embed(b));
    EXPECT_LT(std::abs(cosine), 0.2);
  }
}

TEST(Precomputed, LooksUpKeyedVectors) {
  std::istringstream in("d0\t1 0 0 0\nd0:1\t0 3 0 4\n");
  const auto p = PrecomputedEmbedding::read(in);
  EXPECT_EQ(p.dimension(), 4);
  EXPECT_EQ(p.size(), 2u);
  const Document d = doc_of("d0", {{"x"}, {"y"}});
  EXPECT_EQ(p.embed_document(d), Eigen::Vector4d(1, 0, 0, 0));
  EXPECT_TRUE(p.embed_sentence(d, 1).isApprox(Eigen::Vector4d(0, 0.6, 0, 0.8)));
}

TEST(Precomputed, MixedDimensionsAreAFormatError) {
  std::istringstream in("a\t1 2 3 4\nb\t1 2 3 4 5\n");
  EXPECT_THROW(PrecomputedEmbedding::read(in), FormatError);
}

TEST(Precomputed, MissingKeyIsReported) {
  std::istringstream in("a\t1 2 3 4\n");
  const auto p = PrecomputedEmbedding::read(in);
  EXPECT_THROW(p.lookup("b"), MissingKeyError);
  EXPECT_THROW(p.embed_document(doc_of("b", {})), MissingKeyError);
}

TEST(Providers, OutputIsZeroOrUnitNorm) {
  std::mt19937_64 rng(23);
  TextCorpus corpus;
  for (int i = 0; i < 10; ++i) corpus.documents.push_back(doc_of(std::to_string(i), {random_words(rng, 8, "")}));
  const auto tfidf = TfidfEmbedding::fit(corpus, 48, 2);
  const HashEmbedding hash(48, 2);
  for (const Document& d : corpus.documents) {
    for (const EmbeddingProvider* p : {static_cast<const EmbeddingProvider*>(&tfidf),
                                       static_cast<const EmbeddingProvider*>(&hash)}) {
      const double norm = p->embed_document(d).norm();
      EXPECT_TRUE(norm == 0.0 || std::abs(norm - 1.0) < 1e-9);
    }
  }
  EXPECT_EQ(tfidf.embed(std::vector<std::string>{}).norm(), 0.0);
}
