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

#include "xmtc/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "xmtc/corpus.hpp"
#include "xmtc/error.hpp"
#include "xmtc/parallel.hpp"
#include "xmtc/sampling.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

void MatcherConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("matcher.hidden_dim", "must be >= 1");
  if (num_layers < 0) throw ConfigError("matcher.layers", "must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("matcher.learning_rate", "must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("matcher.momentum", "must lie in [0, 1)");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0))
    throw ConfigError("matcher.warmup_fraction", "must lie in [0, 1]");
  if (max_epoch < 1) throw ConfigError("matcher.max_epoch", "must be >= 1");
  if (batch_size < 1) throw ConfigError("matcher.batch_size", "must be >= 1");
  if (patience < 1) throw ConfigError("matcher.patience", "must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("matcher.validation_fraction", "must lie in [0, 1)");
}

SgdMomentum::SgdMomentum(const Matcher& model, double momentum)
    : velocity_(model.zeros_like()), momentum_(momentum) {}

void SgdMomentum::step(Matcher& model, const Matcher& grad, double learning_rate) {
  std::vector<std::span<double>> params, velocity;
  std::vector<std::span<const double>> grads;
  std::vector<bool> trainable;
  visit_parameters(model, [&](std::span<double> p, bool t) {
    params.push_back(p);
    trainable.push_back(t);
  });
  visit_parameters(velocity_, [&](std::span<double> v, bool) { velocity.push_back(v); });
  visit_parameters(grad, [&](std::span<const double> g, bool) { grads.push_back(g); });
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (!trainable[b]) continue;
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      velocity[b][i] = momentum_ * velocity[b][i] + grads[b][i];
      params[b][i] -= learning_rate * velocity[b][i];
    }
  }
}

namespace {

void add_into(Matcher& total, const Matcher& part, double scale) {
  std::vector<std::span<const double>> src;
  visit_parameters(part, [&](std::span<const double> p, bool) { src.push_back(p); });
  std::size_t b = 0;
  visit_parameters(total, [&](std::span<double> p, bool) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += scale * src[b][i];
    ++b;
  });
}

}  // namespace

double batch_loss_and_gradient(const Matcher& model, std::span<const GraphInput> graphs,
                               const Eigen::MatrixXd& targets,
                               std::span<const Index> uniform,
                               std::span<const Index> reversed, double alpha, Matcher* grad) {
  if (uniform.size() != reversed.size() || uniform.empty())
    throw InvalidArgument("batch_loss_and_gradient: malformed batch");
  const std::size_t n = uniform.size();
  std::vector<double> losses(n);
  std::vector<Matcher> parts;
  if (grad) parts.assign(n, model.zeros_like());
  parallel_for(n, [&](std::size_t i) {
    const GraphInput& gc = graphs[uniform[i]];
    const GraphInput& gr = graphs[reversed[i]];
    losses[i] = pair_loss_and_gradient<double>(
        model, gc.adjacency, gc.features, targets.row(uniform[i]).transpose(), gr.adjacency,
        gr.features, targets.row(reversed[i]).transpose(), alpha, grad ? &parts[i] : nullptr);
  });
  // Summed in pair order so the result does not depend on the thread count.
  const double scale = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loss += losses[i];
    if (grad) add_into(*grad, parts[i], scale);
  }
  return loss * scale;
}

double validation_loss(const Matcher& model, std::span<const GraphInput> graphs,
                       const Eigen::MatrixXd& targets, std::span<const Index> rows) {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double alpha = model.rebalance_enabled ? kInferenceAlpha : 1.0;
  return batch_loss_and_gradient(model, graphs, targets, rows, rows, alpha, nullptr);
}

TrainResult train_matcher(std::span<const GraphInput> graphs, const Eigen::MatrixXd& targets,
                          std::span<const LabelSet> labels, Index num_labels,
                          const MatcherConfig& config, const TrainHooks& hooks) {
  config.validate();
  const auto n_all = static_cast<Index>(graphs.size());
  if (n_all == 0) throw InvalidArgument("train_matcher: empty training set");
  if (targets.rows() != n_all || static_cast<Index>(labels.size()) != n_all)
    throw InvalidArgument("train_matcher: graphs, targets and labels disagree in size");

  std::vector<Index> train_rows, val_rows;
  const bool hold_out = config.validation_fraction > 0.0 &&
                        std::llround(config.validation_fraction * static_cast<double>(n_all)) >= 1 &&
                        n_all >= 2;
  if (hold_out) {
    auto s = split_indices(n_all, config.validation_fraction, config.seed);
    train_rows = std::move(s.train);
    val_rows = std::move(s.validation);
  } else {
    for (Index i = 0; i < n_all; ++i) train_rows.push_back(i);
  }

  std::vector<LabelSet> train_labels;
  for (Index r : train_rows) train_labels.push_back(labels[r]);
  ReversedSampler sampler(train_labels, num_labels, config.seed + 1);

  std::mt19937_64 init_rng(config.seed);
  MatcherShape shape{graphs[0].features.cols(), config.hidden_dim, config.num_layers,
                     targets.cols()};
  TrainResult result{Matcher::create(shape, init_rng), {}, 0};
  Matcher& model = result.model;
  model.learn_eps = config.learn_eps;
  model.use_bias = config.classifier_bias;
  model.rebalance_enabled = config.rebalance;

  const auto n = static_cast<Index>(train_rows.size());
  const Index batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const Index total_steps = batches_per_epoch * (config.max_epoch + 1);
  const double warmup_steps =
      std::ceil(config.warmup_fraction * static_cast<double>(total_steps));
  SgdMomentum optimizer(model, config.momentum);

  Matcher best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  Index stale = 0, step = 0;
  for (Index t = 0; t <= config.max_epoch; ++t) {
    const double alpha = config.rebalance ? alpha_schedule(t, config.max_epoch) : 1.0;
    const auto order = uniform_epoch(n, config.seed * 1000003ULL + static_cast<std::uint64_t>(t));
    const auto batches = paired_batches(order, sampler, config.batch_size);
    double epoch_loss = 0.0;
    for (const PairedBatch& b : batches) {
      std::vector<Index> u, r;
      for (Index i : b.uniform) u.push_back(train_rows[i]);
      for (Index i : b.reversed) r.push_back(train_rows[i]);
      Matcher grad = model.zeros_like();
      epoch_loss += batch_loss_and_gradient(model, graphs, targets, u, r, alpha, &grad) *
                    static_cast<double>(u.size());
      ++step;
      const double warm =
          warmup_steps > 0.0 ? std::min(1.0, static_cast<double>(step) / warmup_steps) : 1.0;
      optimizer.step(model, grad, config.learning_rate * warm);
    }

    EpochLog log{t, alpha, epoch_loss / static_cast<double>(n),
                 std::numeric_limits<double>::quiet_NaN(), false};
    if (hold_out) {
      if (hooks.on_inference_alpha)
        hooks.on_inference_alpha(config.rebalance ? kInferenceAlpha : 1.0);
      log.validation_loss = validation_loss(model, graphs, targets, val_rows);
      if (log.validation_loss < best_loss) {
        best_loss = log.validation_loss;
        best = model;
        result.best_epoch = t;
        log.improved = true;
        stale = 0;
      } else {
        ++stale;
      }
    }
    result.history.push_back(log);
    if (hooks.on_epoch) hooks.on_epoch(log);
    if (hold_out && stale >= config.patience) break;
  }
  if (hold_out) model = std::move(best);
  else result.best_epoch = result.history.back().epoch;
  return result;
}

Eigen::VectorXd cluster_scores(const Matcher& model, const GraphInput& graph,
                               PredictionCost* cost) {
  const auto tc = branch_forward(model.conventional, graph.adjacency, graph.features);
  const Index k = model.num_clusters();
  Eigen::VectorXd scores(k);
  if (!model.rebalance_enabled) {
    for (Index c = 0; c < k; ++c)
      scores[c] = sigmoid(model.w_c.row(c).dot(tc.readout) + (model.use_bias ? model.b_c[c] : 0.0));
  } else {
    const auto tr = branch_forward(model.rebalance, graph.adjacency, graph.features);
    const Index d = tc.readout.size();
    Eigen::VectorXd joint(2 * d);
    joint << tc.readout, tr.readout;
    Eigen::RowVectorXd row(2 * d);
    for (Index c = 0; c < k; ++c) {
      row << model.w_c.row(c), model.w_r.row(c);
      double z = kInferenceAlpha * row.dot(joint);
      if (model.use_bias) z += kInferenceAlpha * (model.b_c[c] + model.b_r[c]);
      scores[c] = sigmoid(z);
    }
  }
  if (cost) cost->cluster_dot_products += k;
  return scores;
}

std::vector<ScoredCluster> rank_clusters(const Eigen::VectorXd& scores) {
  std::vector<ScoredCluster> out;
  out.reserve(static_cast<std::size_t>(scores.size()));
  for (Index c = 0; c < scores.size(); ++c) out.push_back({c, scores[c]});
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredCluster& a, const ScoredCluster& b) { return a.score > b.score; });
  return out;
}

std::vector<ScoredCluster> predict_clusters(const Matcher& model, const GraphInput& graph,
                                            PredictionCost* cost) {
  return rank_clusters(cluster_scores(model, graph, cost));
}

// ---------------------------------------------------------------------------
// Checkpoint: header line, shape line, flag line, then one line per
// parameter block ("<count> v1 v2 ...") in visit_parameters order.

namespace {
constexpr std::string_view kMagic = "xmtc-matcher 1";
}

void write_matcher(std::ostream& out, const Matcher& model) {
  const Index hidden =
      model.conventional.layers.empty() ? 0 : model.conventional.layers[0].mlp.hidden_dim();
  out << kMagic << '\n';
  out << "shape " << model.input_dim() << ' ' << hidden << ' '
      << model.conventional.layers.size() << ' ' << model.num_clusters() << '\n';
  out << "flags " << model.learn_eps << ' ' << model.use_bias << ' ' << model.rebalance_enabled
      << '\n';
  out << "validation_alpha " << format_double(kInferenceAlpha) << '\n';
  visit_parameters(model, [&](std::span<const double> p, bool) {
    out << p.size();
    for (double v : p) out << ' ' << format_double(v);
    out << '\n';
  });
}

Matcher read_matcher(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    if (!std::getline(in, line)) throw ParseError("matcher checkpoint truncated", line_no + 1);
    ++line_no;
    return split_any(line, " ");
  };
  if (!std::getline(in, line) || trim(line) != kMagic)
    throw ParseError("not a matcher checkpoint (bad header)", 1);
  ++line_no;
  auto int_at = [&](const std::vector<std::string_view>& f, std::size_t i) {
    const auto v = i < f.size() ? parse_int(f[i]) : std::nullopt;
    if (!v || *v < 0) throw ParseError("expected a non-negative integer", line_no);
    return static_cast<Index>(*v);
  };
  auto shape_f = next();
  if (shape_f.size() != 5 || shape_f[0] != "shape") throw ParseError("expected shape line", line_no);
  MatcherShape shape{int_at(shape_f, 1), int_at(shape_f, 2), int_at(shape_f, 3), int_at(shape_f, 4)};
  auto flag_f = next();
  if (flag_f.size() != 4 || flag_f[0] != "flags") throw ParseError("expected flags line", line_no);
  std::mt19937_64 unused(0);
  Matcher model = Matcher::create(shape, unused);
  model.learn_eps = int_at(flag_f, 1) != 0;
  model.use_bias = int_at(flag_f, 2) != 0;
  model.rebalance_enabled = int_at(flag_f, 3) != 0;
  next();  // validation_alpha, informational
  visit_parameters(model, [&](std::span<double> p, bool) {
    const auto f = next();
    if (f.empty() || int_at(f, 0) != static_cast<Index>(p.size()) || f.size() != p.size() + 1)
      throw ParseError("parameter block size mismatch", line_no);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto v = parse_double(f[i + 1]);
      if (!v) throw ParseError("non-numeric parameter", line_no);
      p[i] = *v;
    }
  });
  return model;
}

void save_matcher(const std::string& path, const Matcher& model) {
  auto out = open_output(path);
  write_matcher(out, model);
  if (!out) throw IoError("failed writing " + path);
}

Matcher load_matcher(const std::string& path) {
  auto in = open_input(path);
  return read_matcher(in);
}

}  // namespace xmtc
