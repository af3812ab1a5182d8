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

#include "xmtc/embed.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <set>

#include "xmtc/error.hpp"
#include "xmtc/parallel.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void normalize_in_place(Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
}

// Accumulates weight * sign(token) into bucket(token).
void add_hashed(Eigen::VectorXd& v, std::string_view token, double weight,
                std::uint64_t seed) {
  const std::uint64_t h = token_hash(token, seed);
  const auto bucket = static_cast<Index>(h % static_cast<std::uint64_t>(v.size()));
  v[bucket] += (h >> 63) ? -weight : weight;
}

}  // namespace

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  // FNV-1a, then mixed with the seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(seed));
}

Eigen::VectorXd EmbeddingProvider::embed_sentence(const Document& doc,
                                                  std::size_t sentence) const {
  return embed(doc.sentences.at(sentence));
}

Eigen::VectorXd EmbeddingProvider::embed_document(const Document& doc) const {
  const auto tokens = doc.tokens();
  return embed(tokens);
}

Eigen::VectorXd hash_embed(std::span<const std::string> tokens, Index dim,
                           std::uint64_t seed) {
  if (dim < 1) throw InvalidArgument("hash_embed: dimension must be >= 1");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  for (const std::string& t : tokens) add_hashed(v, t, 1.0, seed);
  normalize_in_place(v);
  return v;
}

HashEmbedding::HashEmbedding(Index dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 1) throw InvalidArgument("HashEmbedding: dimension must be >= 1");
}

Eigen::VectorXd HashEmbedding::embed(std::span<const std::string> tokens) const {
  return hash_embed(tokens, dim_, seed_);
}

TfidfEmbedding TfidfEmbedding::fit(const TextCorpus& corpus, Index dim,
                                   std::uint64_t seed) {
  if (corpus.documents.empty())
    throw InvalidArgument("tfidf_fit: empty corpus");
  if (dim < 1) throw InvalidArgument("tfidf_fit: dimension must be >= 1");
  TfidfEmbedding provider(dim, seed);
  provider.n_docs_ = corpus.size();
  for (const Document& doc : corpus.documents) {
    std::set<std::string_view> seen;
    for (const Sentence& s : doc.sentences)
      for (const std::string& t : s) seen.insert(t);
    for (std::string_view t : seen) ++provider.document_frequency_[std::string(t)];
  }
  return provider;
}

double TfidfEmbedding::idf(const std::string& token) const {
  const auto it = document_frequency_.find(token);
  const double df = it == document_frequency_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
}

Eigen::VectorXd TfidfEmbedding::embed(std::span<const std::string> tokens) const {
  std::map<std::string_view, double> tf;
  for (const std::string& t : tokens) tf[t] += 1.0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  for (const auto& [token, count] : tf)
    add_hashed(v, token, count * idf(std::string(token)), seed_);
  normalize_in_place(v);
  return v;
}

PrecomputedEmbedding PrecomputedEmbedding::read(std::istream& in) {
  PrecomputedEmbedding provider;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("expected 'key<TAB>values'", line_no);
    const std::string key(line.substr(0, tab));
    const auto fields = split_any(std::string_view(line).substr(tab + 1), " \t");
    if (fields.empty()) throw ParseError("record without values", line_no);
    Eigen::VectorXd v(static_cast<Index>(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto x = parse_double(fields[j]);
      if (!x || !std::isfinite(*x))
        throw ParseError("non-numeric value '" + std::string(fields[j]) + "'", line_no);
      v[static_cast<Index>(j)] = *x;
    }
    if (provider.dim_ == 0) {
      provider.dim_ = v.size();
    } else if (v.size() != provider.dim_) {
      throw FormatError("line " + std::to_string(line_no) + ": dimension " +
                        std::to_string(v.size()) + " differs from " +
                        std::to_string(provider.dim_));
    }
    normalize_in_place(v);
    provider.vectors_[key] = std::move(v);
  }
  if (provider.vectors_.empty()) throw FormatError("no embedding records");
  return provider;
}

PrecomputedEmbedding PrecomputedEmbedding::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read(in);
}

Eigen::VectorXd PrecomputedEmbedding::lookup(const std::string& key) const {
  const auto it = vectors_.find(key);
  if (it == vectors_.end())
    throw MissingKeyError("no precomputed embedding for key '" + key + "'");
  return it->second;
}

Eigen::VectorXd PrecomputedEmbedding::embed(std::span<const std::string>) const {
  throw MissingKeyError(
      "precomputed embeddings are keyed; embed a document or sentence");
}

Eigen::VectorXd PrecomputedEmbedding::embed_sentence(const Document& doc,
                                                     std::size_t sentence) const {
  return lookup(doc.id + ":" + std::to_string(sentence));
}

Eigen::VectorXd PrecomputedEmbedding::embed_document(const Document& doc) const {
  return lookup(doc.id);
}

Eigen::MatrixXd embed_documents(const TextCorpus& corpus,
                                const EmbeddingProvider& provider) {
  Eigen::MatrixXd out(corpus.size(), provider.dimension());
  parallel_for(corpus.documents.size(), [&](std::size_t i) {
    out.row(static_cast<Index>(i)) = provider.embed_document(corpus.documents[i]).transpose();
  });
  return out;
}

}  // namespace xmtc
