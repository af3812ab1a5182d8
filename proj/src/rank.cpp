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

#include "xmtc/rank.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "xmtc/error.hpp"
#include "xmtc/gin.hpp"
#include "xmtc/parallel.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

namespace {

double log1p_exp_neg(double z) {  // log(1 + e^{-z})
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

/// Logistic problem on a compact column space; the last coordinate of
/// theta is the bias.
struct Problem {
  const SparseRowMatrix& x;
  Eigen::VectorXd y;  // +-1
  double l2;

  Index dim() const { return x.cols() + 1; }

  Eigen::VectorXd margins(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd s = x * theta.head(x.cols());
    s.array() += theta[x.cols()];
    return s;
  }

  double objective(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd s = margins(theta);
    double f = 0.0;
    for (Index i = 0; i < s.size(); ++i) f += log1p_exp_neg(y[i] * s[i]);
    return f + 0.5 * l2 * theta.head(x.cols()).squaredNorm();
  }

  // Gradient plus the Hessian diagonal weights D at theta.
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta, Eigen::VectorXd* curvature) const {
    const Eigen::VectorXd s = margins(theta);
    Eigen::VectorXd r(s.size());
    if (curvature) curvature->resize(s.size());
    for (Index i = 0; i < s.size(); ++i) {
      const double p = sigmoid(y[i] * s[i]);
      r[i] = (p - 1.0) * y[i];
      if (curvature) (*curvature)[i] = p * (1.0 - p);
    }
    Eigen::VectorXd g(dim());
    g.head(x.cols()) = x.transpose() * r + l2 * theta.head(x.cols());
    g[x.cols()] = r.sum();
    return g;
  }

  Eigen::VectorXd hessian_times(const Eigen::VectorXd& curvature, const Eigen::VectorXd& v) const {
    Eigen::VectorXd u = x * v.head(x.cols());
    u.array() += v[x.cols()];
    u.array() *= curvature.array();
    Eigen::VectorXd out(dim());
    out.head(x.cols()) = x.transpose() * u + l2 * v.head(x.cols());
    out[x.cols()] = u.sum();
    return out;
  }
};

struct Solution {
  Eigen::VectorXd theta;
  Index iterations = 0;
  double gradient_norm = 0.0;
};

Solution newton_cg(const Problem& prob, const LogisticOptions& options) {
  Solution sol{Eigen::VectorXd::Zero(prob.dim()), 0, 0.0};
  double f = prob.objective(sol.theta);
  Eigen::VectorXd curvature;
  for (;;) {
    const Eigen::VectorXd g = prob.gradient(sol.theta, &curvature);
    sol.gradient_norm = g.norm();
    if (sol.gradient_norm < options.tolerance || sol.iterations >= options.max_iterations) break;

    // Inexact Newton direction by conjugate gradients.
    const double cg_tol = std::min(0.5, std::sqrt(sol.gradient_norm)) * sol.gradient_norm;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(prob.dim());
    Eigen::VectorXd r = -g;
    Eigen::VectorXd d = r;
    double rr = r.squaredNorm();
    for (Index it = 0; it < std::max<Index>(prob.dim(), 10) && std::sqrt(rr) > cg_tol; ++it) {
      const Eigen::VectorXd hd = prob.hessian_times(curvature, d);
      const double dhd = d.dot(hd);
      if (dhd <= 0.0) break;
      const double a = rr / dhd;
      p += a * d;
      r -= a * hd;
      const double rr_next = r.squaredNorm();
      d = r + (rr_next / rr) * d;
      rr = rr_next;
    }
    if (p.squaredNorm() == 0.0) p = -g;

    const double slope = g.dot(p);
    double step = 1.0;
    Eigen::VectorXd trial;
    double f_trial = f;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      trial = sol.theta + step * p;
      f_trial = prob.objective(trial);
      if (f_trial <= f + 1e-4 * step * slope) break;
    }
    ++sol.iterations;
    if (!(f_trial < f) && step < 1e-15) break;  // no further progress possible
    sol.theta = std::move(trial);
    f = f_trial;
  }
  return sol;
}

// Columns used by `rows`, compacted; local -> global map returned.
SparseRowMatrix compact(const SparseRowMatrix& x, std::span<const Index> rows,
                        std::vector<Index>& columns) {
  std::map<Index, Index> local;
  for (Index r : rows)
    for (SparseRowMatrix::InnerIterator it(x, r); it; ++it) local.emplace(it.col(), 0);
  columns.clear();
  for (auto& [global, id] : local) {
    id = static_cast<Index>(columns.size());
    columns.push_back(global);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseRowMatrix::InnerIterator it(x, rows[i]); it; ++it)
      triplets.emplace_back(static_cast<Index>(i), local[it.col()], it.value());
  SparseRowMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(columns.size()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

FeatureVector expand(const Eigen::VectorXd& local, std::span<const Index> columns, Index dim) {
  FeatureVector w(dim);
  w.reserve(static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (local[static_cast<Index>(j)] != 0.0) w.insertBack(columns[j]) = local[static_cast<Index>(j)];
  return w;
}

Eigen::VectorXd signs(std::span<const char> positive) {
  Eigen::VectorXd y(static_cast<Index>(positive.size()));
  for (std::size_t i = 0; i < positive.size(); ++i) y[static_cast<Index>(i)] = positive[i] ? 1.0 : -1.0;
  return y;
}

double prior_bias(Index n_pos, Index n_neg) {
  const double p = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos + n_neg) + 2.0);
  return std::log(p / (1.0 - p));
}

}  // namespace

LogisticModel train_logistic(const SparseRowMatrix& x, std::span<const char> positive,
                             const LogisticOptions& options) {
  if (static_cast<Index>(positive.size()) != x.rows())
    throw InvalidArgument("train_logistic: label count does not match rows");
  if (!(options.l2 > 0.0)) throw InvalidArgument("train_logistic: l2 must be > 0");
  std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  std::vector<Index> columns;
  const SparseRowMatrix local = compact(x, rows, columns);
  const Solution sol = newton_cg({local, signs(positive), options.l2}, options);
  return {expand(sol.theta.head(local.cols()), columns, x.cols()), sol.theta[local.cols()],
          sol.iterations, sol.gradient_norm};
}

double logistic_gradient_norm(const SparseRowMatrix& x, std::span<const char> positive,
                              const FeatureVector& weights, double bias, double l2) {
  Eigen::VectorXd theta(x.cols() + 1);
  theta.head(x.cols()) = Eigen::VectorXd(weights);
  theta[x.cols()] = bias;
  return Problem{x, signs(positive), l2}.gradient(theta, nullptr).norm();
}

double LabelClassifiers::probability(LabelId label, const FeatureVector& x) const {
  const LabelClassifier& c = labels.at(static_cast<std::size_t>(label));
  if (!c.trained) return 0.0;
  return sigmoid(c.weights.dot(x) + c.bias);
}

LabelClassifiers train_label_classifiers(const Dataset& ds, const LabelClusters& clusters,
                                         const LogisticOptions& options) {
  if (clusters.num_labels() != ds.num_labels)
    throw InvalidArgument("train_label_classifiers: clusters cover " +
                          std::to_string(clusters.num_labels()) + " labels, dataset has " +
                          std::to_string(ds.num_labels));
  const Index k = clusters.num_clusters;
  // Pool of each cluster: instances with at least one label inside it.
  std::vector<std::vector<Index>> pools(static_cast<std::size_t>(k));
  for (Index i = 0; i < ds.size(); ++i) {
    std::vector<Index> hit;
    for (LabelId l : ds.labels[i]) hit.push_back(clusters.assignment[l]);
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    for (Index c : hit) pools[c].push_back(i);
  }
  std::vector<SparseRowMatrix> local(static_cast<std::size_t>(k));
  std::vector<std::vector<Index>> columns(static_cast<std::size_t>(k));
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t c) {
    local[c] = compact(ds.features, pools[c], columns[c]);
  });

  LabelClassifiers out;
  out.num_features = ds.num_features();
  out.labels.resize(static_cast<std::size_t>(ds.num_labels));
  parallel_for(static_cast<std::size_t>(ds.num_labels), [&](std::size_t l) {
    const auto c = static_cast<std::size_t>(clusters.assignment[l]);
    const auto& pool = pools[c];
    std::vector<char> positive(pool.size(), 0);
    Index n_pos = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const LabelSet& ls = ds.labels[pool[i]];
      positive[i] = std::binary_search(ls.begin(), ls.end(), static_cast<LabelId>(l)) ? 1 : 0;
      n_pos += positive[i];
    }
    if (n_pos == 0) return;  // unseen label: never scored
    LabelClassifier& cls = out.labels[l];
    cls.trained = true;
    const Index n_neg = static_cast<Index>(pool.size()) - n_pos;
    if (n_neg == 0) {
      cls.weights = FeatureVector(out.num_features);
      cls.bias = prior_bias(n_pos, 0);
      return;
    }
    const Solution sol = newton_cg({local[c], signs(positive), options.l2}, options);
    cls.weights = expand(sol.theta.head(local[c].cols()), columns[c], out.num_features);
    cls.bias = sol.theta[local[c].cols()];
  });
  return out;
}

std::vector<ScoredLabel> score_labels(const FeatureVector& x,
                                      const Eigen::VectorXd& cluster_scores,
                                      const LabelClassifiers& classifiers,
                                      const LabelClusters& clusters, Index top_b,
                                      ScoreMode mode, PredictionCost* cost) {
  if (top_b < 1) throw InvalidArgument("score_labels: top_b must be >= 1");
  if (cluster_scores.size() != clusters.num_clusters)
    throw InvalidArgument("score_labels: cluster score count mismatch");
  std::vector<Index> order(static_cast<std::size_t>(clusters.num_clusters));
  for (Index c = 0; c < clusters.num_clusters; ++c) order[static_cast<std::size_t>(c)] = c;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return cluster_scores[a] > cluster_scores[b];
  });
  order.resize(static_cast<std::size_t>(std::min(top_b, clusters.num_clusters)));
  std::vector<char> selected(static_cast<std::size_t>(clusters.num_clusters), 0);
  for (Index c : order) selected[static_cast<std::size_t>(c)] = 1;

  std::vector<ScoredLabel> out;
  for (Index l = 0; l < clusters.num_labels(); ++l) {
    const Index c = clusters.assignment[l];
    if (!selected[static_cast<std::size_t>(c)]) continue;
    const double p = classifiers.probability(static_cast<LabelId>(l), x);
    if (cost) ++cost->classifier_evaluations;
    out.push_back({static_cast<LabelId>(l), mode == ScoreMode::mixture ? cluster_scores[c] * p : p});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
  return out;
}

std::vector<ScoredLabel> top_k(std::vector<ScoredLabel> ranked, Index k) {
  if (k < 1) throw InvalidArgument("top_k: k must be >= 1");
  if (static_cast<Index>(ranked.size()) > k) ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

FeatureVector instance_vector(const SparseRowMatrix& features, Index row) {
  FeatureVector v(features.cols());
  for (SparseRowMatrix::InnerIterator it(features, row); it; ++it) v.insertBack(it.col()) = it.value();
  return v;
}

void write_classifiers(std::ostream& out, const LabelClassifiers& classifiers) {
  out << classifiers.num_labels() << ' ' << classifiers.num_features << '\n';
  for (Index l = 0; l < classifiers.num_labels(); ++l) {
    const LabelClassifier& c = classifiers.labels[static_cast<std::size_t>(l)];
    if (!c.trained) continue;
    out << l << " -1 " << format_double(c.bias) << '\n';
    for (FeatureVector::InnerIterator it(c.weights); it; ++it)
      out << l << ' ' << it.index() << ' ' << format_double(it.value()) << '\n';
  }
}

LabelClassifiers read_classifiers(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty classifier store", 1);
  const auto head = split_any(line, " \t");
  const auto nl = head.size() == 2 ? parse_int(head[0]) : std::nullopt;
  const auto nf = head.size() == 2 ? parse_int(head[1]) : std::nullopt;
  if (!nl || !nf || *nl < 0 || *nf < 0) throw ParseError("bad classifier store header", 1);
  LabelClassifiers out;
  out.num_features = *nf;
  out.labels.resize(static_cast<std::size_t>(*nl));
  std::vector<std::vector<std::pair<Index, double>>> entries(out.labels.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_any(line, " \t");
    if (f.size() != 3) throw ParseError("expected 'label feature value'", line_no);
    const auto l = parse_int(f[0]);
    const auto j = parse_int(f[1]);
    const auto v = parse_double(f[2]);
    if (!l || !j || !v) throw ParseError("non-numeric classifier entry", line_no);
    if (*l < 0 || *l >= *nl || *j < -1 || *j >= *nf)
      throw BoundsError("classifier entry out of range", line_no);
    auto& c = out.labels[static_cast<std::size_t>(*l)];
    if (*j == -1) {
      c.trained = true;
      c.bias = *v;
    } else {
      entries[static_cast<std::size_t>(*l)].emplace_back(*j, *v);
    }
  }
  for (std::size_t l = 0; l < out.labels.size(); ++l) {
    auto& c = out.labels[l];
    c.weights = FeatureVector(out.num_features);
    auto& e = entries[l];
    if (!e.empty() && !c.trained) throw FormatError("label " + std::to_string(l) + " has weights but no bias");
    std::sort(e.begin(), e.end());
    for (const auto& [j, v] : e) c.weights.insertBack(j) = v;
  }
  return out;
}

}  // namespace xmtc
