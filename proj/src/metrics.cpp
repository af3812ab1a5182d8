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

#include "xmtc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>

#include "xmtc/error.hpp"
#include "xmtc/parallel.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

namespace {

bool contains(const LabelSet& truth, LabelId l) {
  return std::binary_search(truth.begin(), truth.end(), l);
}

double discount(Index rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

// Truth labels sorted by ascending propensity (largest gain first).
std::vector<LabelId> best_ranking(const LabelSet& truth, const Eigen::VectorXd& propensity) {
  std::vector<LabelId> best(truth.begin(), truth.end());
  std::stable_sort(best.begin(), best.end(),
                   [&](LabelId x, LabelId y) { return propensity[x] < propensity[y]; });
  return best;
}

double raw_psp(std::span<const LabelId> ranked, const LabelSet& truth,
               const Eigen::VectorXd& propensity, Index k) {
  double s = 0.0;
  const Index n = std::min<Index>(k, static_cast<Index>(ranked.size()));
  for (Index r = 0; r < n; ++r)
    if (contains(truth, ranked[r])) s += 1.0 / propensity[ranked[r]];
  return s / static_cast<double>(k);
}

double raw_psdcg(std::span<const LabelId> ranked, const LabelSet& truth,
                 const Eigen::VectorXd& propensity, Index k) {
  double s = 0.0;
  const Index n = std::min<Index>(k, static_cast<Index>(ranked.size()));
  for (Index r = 0; r < n; ++r)
    if (contains(truth, ranked[r])) s += discount(r + 1) / propensity[ranked[r]];
  return s;
}

void check_k(Index k) {
  if (k < 1) throw InvalidArgument("metric cutoff k must be >= 1");
}

}  // namespace

double precision_at_k(std::span<const LabelId> ranked, const LabelSet& truth, Index k) {
  check_k(k);
  Index hits = 0;
  const Index n = std::min<Index>(k, static_cast<Index>(ranked.size()));
  for (Index r = 0; r < n; ++r) hits += contains(truth, ranked[r]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at_k(std::span<const LabelId> ranked, const LabelSet& truth, Index k) {
  check_k(k);
  if (truth.empty()) return 0.0;
  double dcg = 0.0, ideal = 0.0;
  const Index n = std::min<Index>(k, static_cast<Index>(ranked.size()));
  for (Index r = 0; r < n; ++r)
    if (contains(truth, ranked[r])) dcg += discount(r + 1);
  for (Index r = 0; r < std::min<Index>(k, static_cast<Index>(truth.size())); ++r)
    ideal += discount(r + 1);
  return dcg / ideal;
}

double PropensityModel::evaluate(double n, double num_train, double a, double b) {
  const double c = (std::log(num_train) - 1.0) * std::pow(b + 1.0, a);
  return 1.0 / (1.0 + c * std::exp(-a * std::log(n + b)));
}

PropensityModel PropensityModel::fit(const Counts& label_counts, Index num_train, double a,
                                     double b) {
  if (num_train < 1) throw InvalidArgument("propensities: training size must be >= 1");
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("propensities: A and B must be > 0");
  PropensityModel m;
  m.a = a;
  m.b = b;
  m.c = (std::log(static_cast<double>(num_train)) - 1.0) * std::pow(b + 1.0, a);
  m.p.resize(label_counts.size());
  for (Index l = 0; l < label_counts.size(); ++l)
    m.p[l] = evaluate(static_cast<double>(label_counts[l]), static_cast<double>(num_train), a, b);
  return m;
}

double psp_at_k(std::span<const LabelId> ranked, const LabelSet& truth,
                const Eigen::VectorXd& propensity, Index k) {
  check_k(k);
  if (truth.empty()) return 0.0;
  const auto best = best_ranking(truth, propensity);
  return raw_psp(ranked, truth, propensity, k) / raw_psp(best, truth, propensity, k);
}

double psndcg_at_k(std::span<const LabelId> ranked, const LabelSet& truth,
                   const Eigen::VectorXd& propensity, Index k) {
  check_k(k);
  if (truth.empty()) return 0.0;
  const auto best = best_ranking(truth, propensity);
  return raw_psdcg(ranked, truth, propensity, k) / raw_psdcg(best, truth, propensity, k);
}

EvalReport evaluate(std::span<const Ranking> predictions, std::span<const LabelSet> truth,
                    const Eigen::VectorXd& propensity) {
  if (predictions.size() != truth.size())
    throw InvalidArgument("evaluate: " + std::to_string(predictions.size()) +
                          " predictions for " + std::to_string(truth.size()) + " instances");
  const std::size_t n = truth.size();
  std::vector<std::array<double, 12>> per(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t c = 0; c < kReportCutoffs.size(); ++c) {
      const Index k = kReportCutoffs[c];
      per[i][c] = precision_at_k(predictions[i], truth[i], k);
      per[i][3 + c] = ndcg_at_k(predictions[i], truth[i], k);
      per[i][6 + c] = psp_at_k(predictions[i], truth[i], propensity, k);
      per[i][9 + c] = psndcg_at_k(predictions[i], truth[i], propensity, k);
    }
  });
  std::array<double, 12> sum{};
  for (const auto& row : per)
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += row[j];
  EvalReport r;
  r.num_instances = static_cast<Index>(n);
  const double scale = n ? 100.0 / static_cast<double>(n) : 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    r.precision[c] = sum[c] * scale;
    r.ndcg[c] = sum[3 + c] * scale;
    r.psp[c] = sum[6 + c] * scale;
    r.psndcg[c] = sum[9 + c] * scale;
  }
  return r;
}

void write_predictions(std::ostream& out, std::span<const std::vector<ScoredLabel>> predictions) {
  for (const auto& row : predictions) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? " " : "") << row[i].label << ':' << format_double(row[i].score);
    out << '\n';
  }
}

std::vector<std::vector<ScoredLabel>> read_predictions(std::istream& in) {
  std::vector<std::vector<ScoredLabel>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto& row = out.emplace_back();
    for (std::string_view field : split_any(line, " \t")) {
      const auto colon = field.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected label:score", line_no);
      const auto l = parse_int(field.substr(0, colon));
      const auto s = parse_double(field.substr(colon + 1));
      if (!l || !s || *l < 0) throw ParseError("malformed label:score '" + std::string(field) + "'", line_no);
      row.push_back({static_cast<LabelId>(*l), *s});
    }
  }
  return out;
}

std::vector<Ranking> rankings(std::span<const std::vector<ScoredLabel>> predictions) {
  std::vector<Ranking> out;
  out.reserve(predictions.size());
  for (const auto& row : predictions) {
    Ranking& r = out.emplace_back();
    for (const auto& s : row) r.push_back(s.label);
  }
  return out;
}

namespace {

struct Family {
  const char* name;
  std::array<double, 3> EvalReport::*values;
};

constexpr std::array<Family, 4> kFamilies = {{{"P", &EvalReport::precision},
                                              {"nDCG", &EvalReport::ndcg},
                                              {"PSP", &EvalReport::psp},
                                              {"PSnDCG", &EvalReport::psndcg}}};

}  // namespace

void write_report_table(std::ostream& out, const EvalReport& report) {
  const auto flags = out.flags();
  out << std::left << std::setw(8) << "metric" << std::right;
  for (Index k : kReportCutoffs) out << std::setw(10) << "@" + std::to_string(k);
  out << '\n' << std::fixed << std::setprecision(2);
  for (const Family& f : kFamilies) {
    out << std::left << std::setw(8) << f.name << std::right;
    for (double v : report.*f.values) out << std::setw(10) << v;
    out << '\n';
  }
  out << std::left << std::setw(8) << "n" << std::right << std::setw(10) << report.num_instances
      << '\n';
  out.flags(flags);
}

void write_report_kv(std::ostream& out, const EvalReport& report) {
  out << "instances=" << report.num_instances << '\n';
  for (const Family& f : kFamilies)
    for (std::size_t c = 0; c < kReportCutoffs.size(); ++c)
      out << f.name << '@' << kReportCutoffs[c] << '=' << format_double((report.*f.values)[c]) << '\n';
}

EvalReport read_report_kv(std::istream& in) {
  std::map<std::string, std::string, std::less<>> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    kv[std::string(trim(std::string_view(line).substr(0, eq)))] =
        std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw MissingKeyError("report is missing '" + key + "'");
    const auto v = parse_double(it->second);
    if (!v) throw ParseError("non-numeric value for '" + key + "'", 0);
    return *v;
  };
  EvalReport r;
  r.num_instances = static_cast<Index>(get("instances"));
  for (const Family& f : kFamilies)
    for (std::size_t c = 0; c < kReportCutoffs.size(); ++c)
      (r.*f.values)[c] = get(std::string(f.name) + '@' + std::to_string(kReportCutoffs[c]));
  return r;
}

}  // namespace xmtc
