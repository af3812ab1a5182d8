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
#include <unordered_map>

#include <Eigen/Core>

#include "xmtc/corpus.hpp"

namespace xmtc {

/// Maps token lists (or keyed sentences/documents) to dense vectors of a
/// fixed dimension. Every output is either zero or unit L2 norm.
/// Implementations are immutable after construction.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual Index dimension() const = 0;
  virtual Eigen::VectorXd embed(std::span<const std::string> tokens) const = 0;

  /// Sentence `sentence` of `doc`. Defaults to embedding its tokens.
  virtual Eigen::VectorXd embed_sentence(const Document& doc,
                                         std::size_t sentence) const;
  /// Whole document. Defaults to embedding all of its tokens.
  virtual Eigen::VectorXd embed_document(const Document& doc) const;
};

/// Signed feature hashing of the token bag into `dim` buckets, then L2
/// normalization. Empty input gives the zero vector.
Eigen::VectorXd hash_embed(std::span<const std::string> tokens, Index dim,
                           std::uint64_t seed);

/// 64-bit token hash used for bucket and sign selection.
std::uint64_t token_hash(std::string_view token, std::uint64_t seed);

class HashEmbedding final : public EmbeddingProvider {
 public:
  HashEmbedding(Index dim, std::uint64_t seed);
  Index dimension() const override { return dim_; }
  Eigen::VectorXd embed(std::span<const std::string> tokens) const override;

 private:
  Index dim_;
  std::uint64_t seed_;
};

/// tf-idf weights, idf = ln((1 + n_docs) / (1 + df)) + 1, projected to
/// `dim` dimensions with the same signed hashing as HashEmbedding.
class TfidfEmbedding final : public EmbeddingProvider {
 public:
  static TfidfEmbedding fit(const TextCorpus& corpus, Index dim,
                            std::uint64_t seed);

  Index dimension() const override { return dim_; }
  Eigen::VectorXd embed(std::span<const std::string> tokens) const override;
  double idf(const std::string& token) const;
  Index num_documents() const { return n_docs_; }

 private:
  TfidfEmbedding(Index dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  Index dim_;
  std::uint64_t seed_;
  Index n_docs_ = 0;
  std::unordered_map<std::string, Index> document_frequency_;
};

/// Vectors read from "key<TAB>v1 v2 ... vD" lines. Documents are looked up
/// by their id, sentences by "<doc id>:<sentence index>". Stored vectors
/// are returned L2-normalized.
class PrecomputedEmbedding final : public EmbeddingProvider {
 public:
  static PrecomputedEmbedding load(const std::filesystem::path& path);
  static PrecomputedEmbedding read(std::istream& in);

  Index dimension() const override { return dim_; }
  /// Unkeyed token lists cannot be looked up: throws MissingKeyError.
  Eigen::VectorXd embed(std::span<const std::string> tokens) const override;
  Eigen::VectorXd embed_sentence(const Document& doc,
                                 std::size_t sentence) const override;
  Eigen::VectorXd embed_document(const Document& doc) const override;

  Eigen::VectorXd lookup(const std::string& key) const;
  std::size_t size() const { return vectors_.size(); }

 private:
  Index dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

/// Row i = provider.embed_document(corpus.documents[i]).
Eigen::MatrixXd embed_documents(const TextCorpus& corpus,
                                const EmbeddingProvider& provider);

}  // namespace xmtc
