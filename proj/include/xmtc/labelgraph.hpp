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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "xmtc/corpus.hpp"
#include "xmtc/error.hpp"
#include "xmtc/types.hpp"

namespace xmtc {

// ---------------------------------------------------------------------------
// Correlation matrices

struct Cooccurrence {
  Eigen::VectorXd occurrences;  // N: instances per label
  SparseMatrixD pairs;          // M: symmetric, zero diagonal
};

Cooccurrence cooccurrence(std::span<const LabelSet> labels, Index num_labels);
inline Cooccurrence cooccurrence(const Dataset& ds) {
  return cooccurrence(ds.labels, ds.num_labels);
}

/// P_ij = M_ij / N_i; rows with N_i = 0 stay empty.
SparseMatrixD conditional_probability(const Eigen::VectorXd& occurrences,
                                      const SparseMatrixD& pairs);

/// B_ij = 1 iff P_ij >= rho (off-diagonal only). rho in (0, 1].
SparseMatrixD binarize(const SparseMatrixD& conditional, double rho);

/// A_ii = 1 - tau; A_ij = tau / sum_{j != i} B_ij on binary neighbours.
/// tau in (0, 1).
SparseMatrixD reweight(const SparseMatrixD& binary, double tau);

struct LabelGraph {
  Eigen::VectorXd occurrences;
  SparseMatrixD cooccurrences;
  SparseMatrixD conditional;
  SparseMatrixD binary;
  SparseMatrixD adjacency;
  double rho = 0.4;
  double tau = 0.2;

  static LabelGraph build(std::span<const LabelSet> labels, Index num_labels,
                          double rho, double tau);
  Index num_labels() const { return adjacency.rows(); }
  /// Off-diagonal nonzeros of the adjacency.
  Index num_edges() const;
};

/// Sparse "i j value" triplet lines, one per stored entry.
void write_triplets(std::ostream& out, const SparseMatrixD& m);
SparseMatrixD read_triplets(std::istream& in, Index rows, Index cols);

// ---------------------------------------------------------------------------
// Label embeddings and low-pass filtering

/// z_l = v_l / |v_l| with v_l the sum of instance_embeddings rows of the
/// instances carrying l; zero when l has no instances.
template <typename Derived>
Eigen::MatrixXd label_embeddings(std::span<const LabelSet> labels,
                                 Index num_labels,
                                 const Eigen::MatrixBase<Derived>& instance_embeddings) {
  if (instance_embeddings.rows() != static_cast<Index>(labels.size()))
    throw InvalidArgument("label_embeddings: one embedding row per instance required");
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(num_labels, instance_embeddings.cols());
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (LabelId l : labels[i]) z.row(l) += instance_embeddings.row(static_cast<Index>(i));
  for (Index l = 0; l < num_labels; ++l) {
    const double norm = z.row(l).norm();
    if (norm > 0.0) z.row(l) /= norm;
  }
  return z;
}

/// Symmetrized adjacency (A + A^T) / 2. The rho re-weighting yields a
/// row-normalized, generally asymmetric A; the Laplacian and filter act
/// on its symmetric part.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> symmetrize(const Eigen::SparseMatrix<Scalar>& a) {
  Eigen::SparseMatrix<Scalar> at = a.transpose();
  Eigen::SparseMatrix<Scalar> s = (a + at) * Scalar(0.5);
  s.makeCompressed();
  return s;
}

/// D^{-1/2} S D^{-1/2} with S = symmetrize(A) and D = diag(row sums of S).
template <typename Scalar>
Eigen::SparseMatrix<Scalar> normalized_adjacency(const Eigen::SparseMatrix<Scalar>& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("adjacency must be square");
  Eigen::SparseMatrix<Scalar> s = symmetrize(a);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> degree =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(s.rows());
  for (Index k = 0; k < s.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(s, k); it; ++it)
      degree[it.row()] += it.value();
  if ((degree.array() <= Scalar(0)).any())
    throw InvalidArgument("normalized_laplacian: nonpositive node degree");
  // s_ij / sqrt(d_i d_j) per entry: exact 1 on isolated nodes.
  for (Index k = 0; k < s.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(s, k); it; ++it)
      it.valueRef() /= std::sqrt(degree[it.row()] * degree[it.col()]);
  return s;
}

/// L_s = I - D^{-1/2} S D^{-1/2}. Symmetric with spectrum in [0, 2].
template <typename Scalar>
Eigen::SparseMatrix<Scalar> normalized_laplacian(const Eigen::SparseMatrix<Scalar>& a) {
  Eigen::SparseMatrix<Scalar> identity(a.rows(), a.cols());
  identity.setIdentity();
  Eigen::SparseMatrix<Scalar> l = identity - normalized_adjacency(a);
  l.prune(Scalar(0));
  return l;
}

/// G = I - L_s / 2, the first-order low-pass filter.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> lowpass_operator(const Eigen::SparseMatrix<Scalar>& a) {
  Eigen::SparseMatrix<Scalar> identity(a.rows(), a.cols());
  identity.setIdentity();
  Eigen::SparseMatrix<Scalar> g = (identity + normalized_adjacency(a)) * Scalar(0.5);
  g.makeCompressed();
  return g;
}

/// (I - L_s / 2)^k Z, computed as k sparse products. k = 0 returns Z.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> lowpass_filter(
    const Eigen::SparseMatrix<Scalar>& a, const Eigen::MatrixBase<Derived>& z,
    int order) {
  if (order < 0) throw InvalidArgument("lowpass_filter: order must be >= 0");
  if (z.rows() != a.rows()) throw InvalidArgument("lowpass_filter: shape mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = z;
  if (order == 0) return out;
  const Eigen::SparseMatrix<Scalar> g = lowpass_operator(a);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> next(out.rows(), out.cols());
  for (int hop = 0; hop < order; ++hop) {
    next.noalias() = g * out;
    out.swap(next);
  }
  return out;
}

struct SampledFilterOptions {
  Index batch_size = 256;
  Index sample_size = 16;
  std::uint64_t seed = 0;
};

/// Neighbour-sampled version of lowpass_filter. Each hop aggregates, per
/// row, the exact self term plus min(S, deg) off-diagonal neighbours drawn
/// without replacement and rescaled by deg / |sample|. Exact when S is at
/// least the maximum degree; unbiased per hop otherwise.
Eigen::MatrixXd sampled_lowpass_filter(const SparseMatrixD& a,
                                       const Eigen::MatrixXd& z, int order,
                                       const SampledFilterOptions& options);

/// Largest number of off-diagonal neighbours of any node of symmetrize(a).
Index max_degree(const SparseMatrixD& a);

// ---------------------------------------------------------------------------
// Clustering

/// Hard partition of the labels.
struct LabelClusters {
  std::vector<Index> assignment;  // label -> cluster
  Index num_clusters = 0;
  Eigen::MatrixXd centroids;      // K x D (may be empty when loaded)

  Index num_labels() const { return static_cast<Index>(assignment.size()); }
  std::vector<std::vector<LabelId>> members() const;
  Counts sizes() const;
  Index max_cluster_size() const;
};

struct KMeansOptions {
  Index num_clusters = 2;
  Index batch_size = 256;
  Index iterations = 100;
  std::uint64_t seed = 0;
};

/// Mini-batch k-means with k-means++ seeding, per-centre 1/count learning
/// rates, a final full assignment pass, and empty clusters refilled with
/// the point farthest from the centre of the largest cluster.
LabelClusters minibatch_kmeans(const Eigen::MatrixXd& points,
                               const KMeansOptions& options);

/// Sum of squared distances of points to their assigned centroid.
double inertia(const Eigen::MatrixXd& points, const LabelClusters& clusters);

/// Centroid of each cluster as the member mean (zero for empty clusters).
Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& points,
                              std::span<const Index> assignment, Index k);

double adjusted_rand_index(std::span<const Index> a, std::span<const Index> b);

/// Default K = max(2, floor(L / 60)).
Index default_cluster_count(Index num_labels);

void write_clusters(std::ostream& out, const LabelClusters& clusters);
LabelClusters read_clusters(std::istream& in);

/// g_k = 1 iff the instance has a label in cluster k.
Eigen::VectorXd cluster_targets(const LabelSet& labels,
                                const LabelClusters& clusters);
Eigen::MatrixXd cluster_targets(std::span<const LabelSet> labels,
                                const LabelClusters& clusters);

/// Per cluster, number of instances with at least one label inside it.
Counts cluster_instance_histogram(std::span<const LabelSet> labels,
                                  const LabelClusters& clusters);

/// Fraction of entries strictly greater than `threshold`.
double fraction_above(const Counts& counts, Index threshold);

}  // namespace xmtc
