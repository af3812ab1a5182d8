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

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xmtc/types.hpp"

namespace xmtc {

/// Ranked label ids of one instance, best first.
using Ranking = std::vector<LabelId>;

double precision_at_k(std::span<const LabelId> ranked, const LabelSet& truth, Index k);

/// DCG@k over binary gains with 1/log2(r + 1) discounts, divided by the
/// ideal DCG@min(k, |truth|). Empty truth scores 0.
double ndcg_at_k(std::span<const LabelId> ranked, const LabelSet& truth, Index k);

/// p_l = 1 / (1 + C (n_l + B)^-A) with C = (ln N - 1)(B + 1)^A.
struct PropensityModel {
  double a = 0.55;
  double b = 1.5;
  double c = 0.0;
  Eigen::VectorXd p;

  static PropensityModel fit(const Counts& label_counts, Index num_train, double a = 0.55,
                             double b = 1.5);
  static double evaluate(double n, double num_train, double a, double b);
};

/// Propensity-weighted precision normalized by the best achievable value
/// for the same truth set (truth ordered by ascending propensity).
double psp_at_k(std::span<const LabelId> ranked, const LabelSet& truth,
                const Eigen::VectorXd& propensity, Index k);
double psndcg_at_k(std::span<const LabelId> ranked, const LabelSet& truth,
                   const Eigen::VectorXd& propensity, Index k);

inline constexpr std::array<Index, 3> kReportCutoffs = {1, 3, 5};

/// Percentages averaged over instances; index i matches kReportCutoffs[i].
struct EvalReport {
  Index num_instances = 0;
  std::array<double, 3> precision{}, ndcg{}, psp{}, psndcg{};

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport evaluate(std::span<const Ranking> predictions, std::span<const LabelSet> truth,
                    const Eigen::VectorXd& propensity);

/// One line per instance: space-separated "label:score", best first.
void write_predictions(std::ostream& out, std::span<const std::vector<ScoredLabel>> predictions);
std::vector<std::vector<ScoredLabel>> read_predictions(std::istream& in);
std::vector<Ranking> rankings(std::span<const std::vector<ScoredLabel>> predictions);

/// Aligned table with one row per metric family and one column per cutoff.
void write_report_table(std::ostream& out, const EvalReport& report);
/// "key=value" lines, e.g. "P@1=93.5".
void write_report_kv(std::ostream& out, const EvalReport& report);
EvalReport read_report_kv(std::istream& in);

}  // namespace xmtc
