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

#include "xmtc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "xmtc/error.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

FeatureVector Dataset::instance(Index i) const {
  return features.row(i).transpose();
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.num_labels = num_labels;
  out.labels.reserve(rows.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= size()) throw BoundsError("subset row out of range", 0);
    out.labels.push_back(labels[src]);
    for (SparseRowMatrix::InnerIterator it(features, src); it; ++it)
      triplets.emplace_back(static_cast<Index>(r), it.col(), it.value());
  }
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  out.features.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

void Dataset::validate() const {
  if (features.rows() != size())
    throw FormatError("feature rows do not match label rows");
  for (Index i = 0; i < size(); ++i) {
    for (LabelId l : labels[i])
      if (l < 0 || l >= num_labels)
        throw BoundsError("label " + std::to_string(l) + " >= " +
                              std::to_string(num_labels),
                          0);
  }
  for (Index k = 0; k < features.outerSize(); ++k)
    for (SparseRowMatrix::InnerIterator it(features, k); it; ++it)
      if (!std::isfinite(it.value()))
        throw FormatError("non-finite feature value in row " +
                          std::to_string(k));
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.num_labels != b.num_labels || a.labels != b.labels ||
      a.features.rows() != b.features.rows() ||
      a.features.cols() != b.features.cols() ||
      a.features.nonZeros() != b.features.nonZeros())
    return false;
  for (Index k = 0; k < a.features.outerSize(); ++k) {
    SparseRowMatrix::InnerIterator ia(a.features, k), ib(b.features, k);
    for (; ia && ib; ++ia, ++ib)
      if (ia.col() != ib.col() || ia.value() != ib.value()) return false;
    if (ia || ib) return false;
  }
  return true;
}

namespace {

struct XmcHeader {
  Index instances = 0;
  Index features = 0;
  Index labels = 0;
};

XmcHeader parse_header(std::string_view line) {
  const auto fields = split_any(line, " \t\r");
  if (fields.size() != 3)
    throw ParseError(
        "header must be 'num_instances num_features num_labels'", 1);
  XmcHeader h;
  Index* slots[] = {&h.instances, &h.features, &h.labels};
  for (int i = 0; i < 3; ++i) {
    const auto v = parse_int(fields[i]);
    if (!v || *v < 0) throw ParseError("malformed header value '" + std::string(fields[i]) + "'", 1);
    *slots[i] = *v;
  }
  return h;
}

}  // namespace

Dataset read_xmc(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const XmcHeader header = parse_header(line);

  Dataset ds;
  ds.num_labels = header.labels;
  ds.labels.reserve(header.instances);
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<Index>(ds.labels.size()) == header.instances) {
      if (trim(line).empty()) continue;
      throw ParseError("more data lines than declared in header", line_no);
    }
    const Index row = static_cast<Index>(ds.labels.size());
    std::string_view rest(line);
    LabelSet labels;
    // A line starts with the label list unless its first field is a
    // feature pair (or it starts with a space: no labels).
    if (!rest.empty() && rest.front() != ' ' && rest.front() != '\t') {
      const std::size_t end = rest.find_first_of(" \t");
      const std::string_view first = rest.substr(0, end);
      if (first.find(':') == std::string_view::npos) {
        for (std::string_view tok : split_exact(first, ',')) {
          const auto v = parse_int(tok);
          if (!v) throw ParseError("non-numeric label '" + std::string(tok) + "'", line_no);
          if (*v < 0 || *v >= header.labels)
            throw BoundsError("label " + std::to_string(*v) + " >= " +
                                  std::to_string(header.labels),
                              line_no);
          labels.push_back(static_cast<LabelId>(*v));
        }
        rest = end == std::string_view::npos ? std::string_view{}
                                              : rest.substr(end);
      }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (std::string_view pair : split_any(rest, " \t")) {
      const std::size_t colon = pair.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("expected feature:value, got '" + std::string(pair) + "'", line_no);
      const auto index = parse_int(pair.substr(0, colon));
      const auto value = parse_double(pair.substr(colon + 1));
      if (!index) throw ParseError("non-numeric feature index in '" + std::string(pair) + "'", line_no);
      if (!value || !std::isfinite(*value))
        throw ParseError("non-numeric feature value in '" + std::string(pair) + "'", line_no);
      if (*index < 0 || *index >= header.features)
        throw BoundsError("feature " + std::to_string(*index) + " >= " +
                              std::to_string(header.features),
                          line_no);
      triplets.emplace_back(row, *index, *value);
    }
    ds.labels.push_back(std::move(labels));
  }
  if (static_cast<Index>(ds.labels.size()) != header.instances)
    throw ParseError("expected " + std::to_string(header.instances) +
                         " data lines, found " +
                         std::to_string(ds.labels.size()),
                     line_no + 1);
  ds.features.resize(header.instances, header.features);
  // Duplicate feature indices on one line are summed.
  ds.features.setFromTriplets(triplets.begin(), triplets.end());
  ds.features.makeCompressed();
  return ds;
}

Dataset parse_xmc(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_xmc(in);
}

void write_xmc(std::ostream& out, const Dataset& ds) {
  out << ds.size() << ' ' << ds.num_features() << ' ' << ds.num_labels
      << '\n';
  for (Index i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.labels[i].size(); ++j) {
      if (j) out << ',';
      out << ds.labels[i][j];
    }
    for (SparseRowMatrix::InnerIterator it(ds.features, i); it; ++it)
      out << ' ' << it.col() << ':' << format_double(it.value());
    out << '\n';
  }
}

void write_xmc(const std::filesystem::path& path, const Dataset& ds) {
  auto out = open_output(path);
  write_xmc(out, ds);
}

Counts label_frequencies(std::span<const LabelSet> labels, Index num_labels) {
  Counts n = Counts::Zero(num_labels);
  for (const LabelSet& y : labels)
    for (LabelId l : y) ++n[l];
  return n;
}

Counts label_frequencies(const Dataset& ds) {
  return label_frequencies(ds.labels, ds.num_labels);
}

DatasetStats dataset_stats(const Dataset& train, const Dataset& test) {
  if (train.empty()) throw InvalidArgument("dataset_stats: empty training set");
  if (train.num_labels != test.num_labels ||
      train.num_features() != test.num_features())
    throw InvalidArgument("dataset_stats: train/test dimensions differ");
  if (train.num_labels == 0)
    throw InvalidArgument("dataset_stats: zero labels");
  Index total = 0;
  for (const LabelSet& y : train.labels) total += static_cast<Index>(y.size());
  DatasetStats s;
  s.n_train = train.size();
  s.n_test = test.size();
  s.num_features = train.num_features();
  s.num_labels = train.num_labels;
  s.avg_labels_per_instance =
      static_cast<double>(total) / static_cast<double>(train.size());
  s.avg_instances_per_label =
      static_cast<double>(total) / static_cast<double>(train.num_labels);
  return s;
}

SplitIndices split_indices(Index n, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw InvalidArgument("split: val_fraction must lie in (0, 1)");
  const auto n_val = static_cast<Index>(std::llround(val_fraction * static_cast<double>(n)));
  if (n_val < 1 || n - n_val < 1)
    throw InvalidArgument("split: fraction leaves an empty side for n = " +
                          std::to_string(n));
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  SplitIndices s;
  s.validation.assign(order.begin(), order.begin() + n_val);
  s.train.assign(order.begin() + n_val, order.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double val_fraction,
                                  std::uint64_t seed) {
  const SplitIndices s = split_indices(ds.size(), val_fraction, seed);
  return {ds.subset(s.train), ds.subset(s.validation)};
}

// ---------------------------------------------------------------------------

std::vector<std::string> Document::tokens() const {
  std::vector<std::string> out;
  for (const Sentence& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

TextCorpus TextCorpus::subset(std::span<const Index> rows) const {
  TextCorpus out;
  out.documents.reserve(rows.size());
  for (Index r : rows) {
    if (r < 0 || r >= size()) throw BoundsError("subset row out of range", 0);
    out.documents.push_back(documents[r]);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

TextCorpus read_text_corpus(std::istream& in) {
  TextCorpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Document doc;
    doc.id = std::to_string(corpus.documents.size());
    if (!line.empty()) {
      for (std::string_view part : split_exact(line, '\t')) {
        Sentence s = tokenize(part);
        if (!s.empty()) doc.sentences.push_back(std::move(s));
      }
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

TextCorpus parse_text_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_text_corpus(in);
}

void write_text_corpus(std::ostream& out, const TextCorpus& corpus) {
  for (const Document& doc : corpus.documents) {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (s) out << '\t';
      for (std::size_t t = 0; t < doc.sentences[s].size(); ++t) {
        if (t) out << ' ';
        out << doc.sentences[s][t];
      }
    }
    out << '\n';
  }
}

void write_text_corpus(const std::filesystem::path& path,
                       const TextCorpus& corpus) {
  auto out = open_output(path);
  write_text_corpus(out, corpus);
}

}  // namespace xmtc
