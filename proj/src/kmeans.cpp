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

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "xmtc/labelgraph.hpp"

namespace xmtc {

namespace {

// Nearest centre by squared Euclidean distance; ties go to the lowest id.
Index nearest(const Eigen::MatrixXd& centres, const Eigen::Ref<const Eigen::RowVectorXd>& x,
              double* distance = nullptr) {
  Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centres.rows(); ++c) {
    const double d = (centres.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (distance) *distance = best_d;
  return best;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, Index k,
                                 std::mt19937_64& rng) {
  const Index n = points.rows();
  Eigen::MatrixXd centres(k, points.cols());
  std::vector<char> chosen(n, 0);
  Index first = std::uniform_int_distribution<Index>(0, n - 1)(rng);
  centres.row(0) = points.row(first);
  chosen[first] = 1;
  Eigen::VectorXd d2(n);
  for (Index i = 0; i < n; ++i) d2[i] = (points.row(i) - centres.row(0)).squaredNorm();
  for (Index c = 1; c < k; ++c) {
    Index pick = -1;
    if (d2.sum() > 0.0) {
      std::discrete_distribution<Index> draw(d2.data(), d2.data() + n);
      pick = draw(rng);
    } else {
      // Every remaining point coincides with a centre.
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i)
        if (!chosen[i]) free.push_back(i);
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    chosen[pick] = 1;
    centres.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (points.row(i) - centres.row(c)).squaredNorm());
  }
  return centres;
}

}  // namespace

LabelClusters minibatch_kmeans(const Eigen::MatrixXd& points,
                               const KMeansOptions& options) {
  const Index n = points.rows();
  const Index k = options.num_clusters;
  if (k < 1) throw InvalidArgument("minibatch_kmeans: K must be >= 1");
  if (k > n) throw InvalidArgument("minibatch_kmeans: K = " + std::to_string(k) +
                                   " exceeds the number of points " + std::to_string(n));
  if (options.iterations < 1) throw InvalidArgument("minibatch_kmeans: iterations must be >= 1");
  if (options.batch_size < 1) throw InvalidArgument("minibatch_kmeans: batch size must be >= 1");

  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd centres = kmeans_plus_plus(points, k, rng);
  std::vector<double> counts(k, 0.0);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Index> batch(options.batch_size), batch_assign(options.batch_size);

  for (Index t = 0; t < options.iterations; ++t) {
    for (Index b = 0; b < options.batch_size; ++b) batch[b] = pick(rng);
    for (Index b = 0; b < options.batch_size; ++b)
      batch_assign[b] = nearest(centres, points.row(batch[b]));
    for (Index b = 0; b < options.batch_size; ++b) {
      const Index c = batch_assign[b];
      counts[c] += 1.0;
      const double eta = 1.0 / counts[c];
      centres.row(c) = (1.0 - eta) * centres.row(c) + eta * points.row(batch[b]);
    }
  }

  LabelClusters out;
  out.num_clusters = k;
  out.assignment.resize(n);
  for (Index i = 0; i < n; ++i) out.assignment[i] = nearest(centres, points.row(i));

  // Refill empty clusters from the largest one.
  Counts sizes = out.sizes();
  for (Index c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    Index donor = 0;
    for (Index j = 1; j < k; ++j)
      if (sizes[j] > sizes[donor]) donor = j;
    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (out.assignment[i] != donor) continue;
      const double d = (points.row(i) - centres.row(donor)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    out.assignment[far] = c;
    centres.row(c) = points.row(far);
    --sizes[donor];
    ++sizes[c];
  }
  out.centroids = std::move(centres);
  return out;
}

double inertia(const Eigen::MatrixXd& points, const LabelClusters& clusters) {
  const Eigen::MatrixXd centres =
      clusters.centroids.rows() == clusters.num_clusters
          ? clusters.centroids
          : cluster_means(points, clusters.assignment, clusters.num_clusters);
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - centres.row(clusters.assignment[i])).squaredNorm();
  return total;
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& points,
                              std::span<const Index> assignment, Index k) {
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, points.cols());
  Eigen::VectorXd n = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    means.row(assignment[i]) += points.row(static_cast<Index>(i));
    n[assignment[i]] += 1.0;
  }
  for (Index c = 0; c < k; ++c)
    if (n[c] > 0.0) means.row(c) /= n[c];
  return means;
}

double adjusted_rand_index(std::span<const Index> a, std::span<const Index> b) {
  if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: size mismatch");
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<Index, Index>, double> table;
  std::map<Index, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [_, v] : table) index += comb2(v);
  for (const auto& [_, v] : rows) sum_rows += comb2(v);
  for (const auto& [_, v] : cols) sum_cols += comb2(v);
  const double expected = sum_rows * sum_cols / comb2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

}  // namespace xmtc
