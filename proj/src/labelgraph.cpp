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

#include "xmtc/labelgraph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include "xmtc/parallel.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

Cooccurrence cooccurrence(std::span<const LabelSet> labels, Index num_labels) {
  Cooccurrence out;
  out.occurrences = Eigen::VectorXd::Zero(num_labels);
  std::map<std::pair<LabelId, LabelId>, double> pairs;
  for (const LabelSet& y : labels) {
    for (std::size_t a = 0; a < y.size(); ++a) {
      if (y[a] < 0 || y[a] >= num_labels) throw BoundsError("label out of range", 0);
      out.occurrences[y[a]] += 1.0;
      for (std::size_t b = a + 1; b < y.size(); ++b) {
        if (y[a] == y[b]) continue;
        pairs[{y[a], y[b]}] += 1.0;
      }
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(pairs.size() * 2);
  for (const auto& [ij, count] : pairs) {
    triplets.emplace_back(ij.first, ij.second, count);
    triplets.emplace_back(ij.second, ij.first, count);
  }
  out.pairs.resize(num_labels, num_labels);
  out.pairs.setFromTriplets(triplets.begin(), triplets.end());
  out.pairs.makeCompressed();
  return out;
}

SparseMatrixD conditional_probability(const Eigen::VectorXd& occurrences,
                                      const SparseMatrixD& pairs) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(pairs.nonZeros()));
  for (Index k = 0; k < pairs.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(pairs, k); it; ++it) {
      const double n = occurrences[it.row()];
      if (n > 0.0) triplets.emplace_back(it.row(), it.col(), it.value() / n);
    }
  SparseMatrixD p(pairs.rows(), pairs.cols());
  p.setFromTriplets(triplets.begin(), triplets.end());
  p.makeCompressed();
  return p;
}

SparseMatrixD binarize(const SparseMatrixD& conditional, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("binarize: rho must lie in (0, 1]");
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index k = 0; k < conditional.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(conditional, k); it; ++it)
      if (it.row() != it.col() && it.value() >= rho)
        triplets.emplace_back(it.row(), it.col(), 1.0);
  SparseMatrixD b(conditional.rows(), conditional.cols());
  b.setFromTriplets(triplets.begin(), triplets.end());
  b.makeCompressed();
  return b;
}

SparseMatrixD reweight(const SparseMatrixD& binary, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("reweight: tau must lie in (0, 1)");
  const Index n = binary.rows();
  Eigen::VectorXd neighbours = Eigen::VectorXd::Zero(n);
  for (Index k = 0; k < binary.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(binary, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) neighbours[it.row()] += 1.0;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(binary.nonZeros() + n));
  for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0 - tau);
  for (Index k = 0; k < binary.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(binary, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0)
        triplets.emplace_back(it.row(), it.col(), tau / neighbours[it.row()]);
  SparseMatrixD a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

LabelGraph LabelGraph::build(std::span<const LabelSet> labels, Index num_labels,
                             double rho, double tau) {
  LabelGraph g;
  g.rho = rho;
  g.tau = tau;
  Cooccurrence c = cooccurrence(labels, num_labels);
  g.occurrences = std::move(c.occurrences);
  g.cooccurrences = std::move(c.pairs);
  g.conditional = conditional_probability(g.occurrences, g.cooccurrences);
  g.binary = binarize(g.conditional, rho);
  g.adjacency = reweight(g.binary, tau);
  return g;
}

Index LabelGraph::num_edges() const {
  Index n = 0;
  for (Index k = 0; k < adjacency.outerSize(); ++k)
    for (SparseMatrixD::InnerIterator it(adjacency, k); it; ++it)
      if (it.row() != it.col()) ++n;
  return n;
}

void write_triplets(std::ostream& out, const SparseMatrixD& m) {
  // Row-major order for stable, diff-friendly output.
  const SparseRowMatrix rows = m;
  for (Index i = 0; i < rows.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(rows, i); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

SparseMatrixD read_triplets(std::istream& in, Index rows, Index cols) {
  std::vector<Eigen::Triplet<double>> triplets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_any(line, " \t\r");
    if (f.size() != 3) throw ParseError("expected 'i j value'", line_no);
    const auto i = parse_int(f[0]);
    const auto j = parse_int(f[1]);
    const auto v = parse_double(f[2]);
    if (!i || !j || !v) throw ParseError("malformed triplet", line_no);
    if (*i < 0 || *i >= rows || *j < 0 || *j >= cols)
      throw BoundsError("triplet index out of range", line_no);
    triplets.emplace_back(*i, *j, *v);
  }
  SparseMatrixD m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

// ---------------------------------------------------------------------------

Index max_degree(const SparseMatrixD& a) {
  const SparseRowMatrix s = symmetrize(a);
  Index best = 0;
  for (Index i = 0; i < s.outerSize(); ++i) {
    Index deg = 0;
    for (SparseRowMatrix::InnerIterator it(s, i); it; ++it)
      if (it.col() != i) ++deg;
    best = std::max(best, deg);
  }
  return best;
}

Eigen::MatrixXd sampled_lowpass_filter(const SparseMatrixD& a,
                                       const Eigen::MatrixXd& z, int order,
                                       const SampledFilterOptions& options) {
  if (order < 0) throw InvalidArgument("sampled_lowpass_filter: order must be >= 0");
  if (options.sample_size < 1) throw InvalidArgument("sampled_lowpass_filter: sample size must be >= 1");
  if (options.batch_size < 1) throw InvalidArgument("sampled_lowpass_filter: batch size must be >= 1");
  if (z.rows() != a.rows()) throw InvalidArgument("sampled_lowpass_filter: shape mismatch");
  // Exhaustive sampling is the exact filter.
  if (order == 0 || options.sample_size >= max_degree(a))
    return lowpass_filter(a, z, order);
  Eigen::MatrixXd out = z;

  const SparseRowMatrix g = lowpass_operator(a);
  const Index n = g.rows();
  // Per row: diagonal weight and off-diagonal (column, weight) lists.
  Eigen::VectorXd self(n);
  std::vector<std::vector<std::pair<Index, double>>> neighbours(n);
  for (Index i = 0; i < n; ++i) {
    self[i] = 0.0;
    for (SparseRowMatrix::InnerIterator it(g, i); it; ++it) {
      if (it.col() == i) self[i] = it.value();
      else neighbours[i].emplace_back(it.col(), it.value());
    }
  }

  const Index batches = (n + options.batch_size - 1) / options.batch_size;
  Eigen::MatrixXd next(n, z.cols());
  for (int hop = 0; hop < order; ++hop) {
    parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                        static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(hop),
                        static_cast<std::uint32_t>(b)};
      std::mt19937_64 rng(seq);
      std::vector<std::pair<Index, double>> sample;
      const Index begin = static_cast<Index>(b) * options.batch_size;
      const Index end = std::min(n, begin + options.batch_size);
      for (Index i = begin; i < end; ++i) {
        next.row(i) = self[i] * out.row(i);
        const auto& nb = neighbours[i];
        const auto deg = static_cast<Index>(nb.size());
        if (deg == 0) continue;
        if (deg <= options.sample_size) {
          for (const auto& [j, w] : nb) next.row(i) += w * out.row(j);
          continue;
        }
        sample.clear();
        std::sample(nb.begin(), nb.end(), std::back_inserter(sample),
                    options.sample_size, rng);
        const double scale = static_cast<double>(deg) / static_cast<double>(sample.size());
        for (const auto& [j, w] : sample) next.row(i) += (scale * w) * out.row(j);
      }
    });
    out.swap(next);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<LabelId>> LabelClusters::members() const {
  std::vector<std::vector<LabelId>> out(num_clusters);
  for (std::size_t l = 0; l < assignment.size(); ++l)
    out[assignment[l]].push_back(static_cast<LabelId>(l));
  return out;
}

Counts LabelClusters::sizes() const {
  Counts s = Counts::Zero(num_clusters);
  for (Index c : assignment) ++s[c];
  return s;
}

Index LabelClusters::max_cluster_size() const {
  return num_clusters ? sizes().maxCoeff() : 0;
}

Index default_cluster_count(Index num_labels) {
  return std::max<Index>(2, num_labels / 60);
}

void write_clusters(std::ostream& out, const LabelClusters& clusters) {
  for (std::size_t l = 0; l < clusters.assignment.size(); ++l)
    out << l << '\t' << clusters.assignment[l] << '\n';
}

LabelClusters read_clusters(std::istream& in) {
  std::vector<std::pair<Index, Index>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_any(line, " \t\r");
    if (f.size() != 2) throw ParseError("expected 'label_id<TAB>cluster_id'", line_no);
    const auto l = parse_int(f[0]);
    const auto c = parse_int(f[1]);
    if (!l || !c || *l < 0 || *c < 0) throw ParseError("malformed cluster record", line_no);
    rows.emplace_back(*l, *c);
  }
  LabelClusters clusters;
  clusters.assignment.assign(rows.size(), -1);
  for (const auto& [l, c] : rows) {
    if (l >= static_cast<Index>(rows.size()))
      throw FormatError("cluster file does not cover labels 0..L-1");
    clusters.assignment[l] = c;
    clusters.num_clusters = std::max(clusters.num_clusters, c + 1);
  }
  for (Index c : clusters.assignment)
    if (c < 0) throw FormatError("cluster file assigns a label twice");
  return clusters;
}

Eigen::VectorXd cluster_targets(const LabelSet& labels,
                                const LabelClusters& clusters) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(clusters.num_clusters);
  for (LabelId l : labels) g[clusters.assignment[l]] = 1.0;
  return g;
}

Eigen::MatrixXd cluster_targets(std::span<const LabelSet> labels,
                                const LabelClusters& clusters) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Index>(labels.size()),
                                            clusters.num_clusters);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (LabelId l : labels[i]) g(static_cast<Index>(i), clusters.assignment[l]) = 1.0;
  return g;
}

Counts cluster_instance_histogram(std::span<const LabelSet> labels,
                                  const LabelClusters& clusters) {
  Counts counts = Counts::Zero(clusters.num_clusters);
  std::vector<char> hit(clusters.num_clusters);
  for (const LabelSet& y : labels) {
    std::fill(hit.begin(), hit.end(), 0);
    for (LabelId l : y) hit[clusters.assignment[l]] = 1;
    for (Index c = 0; c < clusters.num_clusters; ++c) counts[c] += hit[c];
  }
  return counts;
}

double fraction_above(const Counts& counts, Index threshold) {
  if (counts.size() == 0) return 0.0;
  return static_cast<double>((counts.array() > threshold).count()) /
         static_cast<double>(counts.size());
}

}  // namespace xmtc
