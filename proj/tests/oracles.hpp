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

// Deliberately naive reference implementations. They share no code with
// the library beyond its value types.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xmtc/types.hpp"

namespace oracle {

using xmtc::Index;
using xmtc::LabelId;
using xmtc::LabelSet;

struct DenseLabelGraph {
  Eigen::VectorXd n;
  Eigen::MatrixXd m, p, b, a;
};

/// N, M, P, B and A by enumerating every instance and every label pair.
inline DenseLabelGraph label_graph(const std::vector<LabelSet>& labels, Index num_labels,
                                   double rho, double tau) {
  DenseLabelGraph g;
  g.n = Eigen::VectorXd::Zero(num_labels);
  g.m = Eigen::MatrixXd::Zero(num_labels, num_labels);
  for (Index i = 0; i < num_labels; ++i) {
    for (const LabelSet& y : labels) {
      const bool has_i = std::find(y.begin(), y.end(), i) != y.end();
      if (has_i) g.n[i] += 1.0;
      for (Index j = 0; j < num_labels; ++j) {
        if (j == i) continue;
        const bool has_j = std::find(y.begin(), y.end(), j) != y.end();
        if (has_i && has_j) g.m(i, j) += 1.0;
      }
    }
  }
  g.p = Eigen::MatrixXd::Zero(num_labels, num_labels);
  g.b = Eigen::MatrixXd::Zero(num_labels, num_labels);
  g.a = Eigen::MatrixXd::Zero(num_labels, num_labels);
  for (Index i = 0; i < num_labels; ++i) {
    double neighbours = 0.0;
    for (Index j = 0; j < num_labels; ++j) {
      if (g.n[i] > 0.0) g.p(i, j) = g.m(i, j) / g.n[i];
      if (i != j && g.p(i, j) >= rho) {
        g.b(i, j) = 1.0;
        neighbours += 1.0;
      }
    }
    g.a(i, i) = 1.0 - tau;
    for (Index j = 0; j < num_labels; ++j)
      if (g.b(i, j) == 1.0) g.a(i, j) = tau / neighbours;
  }
  return g;
}

/// I - D^{-1/2} S D^{-1/2} with S the symmetric part of a, all dense.
inline Eigen::MatrixXd laplacian(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
  const Eigen::VectorXd d = s.rowwise().sum();
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) l(i, j) -= s(i, j) / std::sqrt(d[i] * d[j]);
  return l;
}

/// Random label sets over [0, num_labels); every set non-empty.
inline std::vector<LabelSet> random_label_sets(std::mt19937_64& rng, Index instances,
                                               Index num_labels, Index max_size) {
  std::uniform_int_distribution<Index> size(1, max_size);
  std::uniform_int_distribution<LabelId> label(0, static_cast<LabelId>(num_labels - 1));
  std::vector<LabelSet> out(static_cast<std::size_t>(instances));
  for (auto& y : out) {
    std::set<LabelId> s;
    const Index k = size(rng);
    for (Index t = 0; t < k; ++t) s.insert(label(rng));
    y.assign(s.begin(), s.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ranking metrics

inline bool relevant(LabelId l, const LabelSet& truth) {
  return std::find(truth.begin(), truth.end(), l) != truth.end();
}

inline double precision(const std::vector<LabelId>& ranked, const LabelSet& truth, Index k) {
  double hits = 0.0;
  for (Index r = 0; r < k && r < static_cast<Index>(ranked.size()); ++r)
    if (relevant(ranked[r], truth)) hits += 1.0;
  return hits / static_cast<double>(k);
}

inline double ndcg(const std::vector<LabelId>& ranked, const LabelSet& truth, Index k) {
  if (truth.empty()) return 0.0;
  double dcg = 0.0, ideal = 0.0;
  for (Index r = 0; r < k && r < static_cast<Index>(ranked.size()); ++r)
    if (relevant(ranked[r], truth)) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  for (Index r = 0; r < k && r < static_cast<Index>(truth.size()); ++r)
    ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / ideal;
}

inline double raw_psp(const std::vector<LabelId>& ranked, const LabelSet& truth,
                      const Eigen::VectorXd& p, Index k) {
  double s = 0.0;
  for (Index r = 0; r < k && r < static_cast<Index>(ranked.size()); ++r)
    if (relevant(ranked[r], truth)) s += 1.0 / p[ranked[r]];
  return s / static_cast<double>(k);
}

inline double raw_psdcg(const std::vector<LabelId>& ranked, const LabelSet& truth,
                        const Eigen::VectorXd& p, Index k) {
  double s = 0.0;
  for (Index r = 0; r < k && r < static_cast<Index>(ranked.size()); ++r)
    if (relevant(ranked[r], truth))
      s += 1.0 / p[ranked[r]] / std::log2(static_cast<double>(r) + 2.0);
  return s;
}

/// Best value of `raw` over every ordering of every k-subset of `pool`.
template <typename Raw>
double best_over_rankings(std::vector<LabelId> pool, const LabelSet& truth,
                          const Eigen::VectorXd& p, Index k, Raw raw) {
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  const Index len = std::min<Index>(k, static_cast<Index>(pool.size()));
  double best = 0.0;
  std::vector<LabelId> prefix;
  std::vector<char> used(pool.size(), 0);
  auto recurse = [&](auto&& self) -> void {
    if (static_cast<Index>(prefix.size()) == len) {
      best = std::max(best, raw(prefix, truth, p, k));
      return;
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      used[i] = 1;
      prefix.push_back(pool[i]);
      self(self);
      prefix.pop_back();
      used[i] = 0;
    }
  };
  recurse(recurse);
  return best;
}

/// Normalized propensity-scored metric with a brute-force normalizer over
/// rankings of the scored labels together with the truth.
template <typename Raw>
double normalized(const std::vector<LabelId>& ranked, const LabelSet& truth,
                  const Eigen::VectorXd& p, Index k, Raw raw) {
  if (truth.empty()) return 0.0;
  std::vector<LabelId> pool = ranked;
  pool.insert(pool.end(), truth.begin(), truth.end());
  const double best = best_over_rankings(pool, truth, p, k, raw);
  return best > 0.0 ? raw(ranked, truth, p, k) / best : 0.0;
}

// ---------------------------------------------------------------------------

/// Fresh, empty scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("xmtc-" + name + "-" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
