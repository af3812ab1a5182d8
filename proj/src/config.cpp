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

#include "xmtc/config.hpp"

#include <functional>
#include <istream>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "xmtc/error.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(const std::string& field, const std::string& value)>;

template <typename T>
Setter integer(T& target) {
  return [&target](const std::string& field, const std::string& value) {
    const auto v = parse_int(trim(value));
    if (!v) throw ConfigError(field, "expected an integer, got '" + value + "'");
    if constexpr (std::is_unsigned_v<T>) {
      if (*v < 0) throw ConfigError(field, "must be non-negative");
    }
    target = static_cast<T>(*v);
  };
}

Setter real(double& target) {
  return [&target](const std::string& field, const std::string& value) {
    const auto v = parse_double(trim(value));
    if (!v) throw ConfigError(field, "expected a number, got '" + value + "'");
    target = *v;
  };
}

Setter boolean(bool& target) {
  return [&target](const std::string& field, const std::string& value) {
    const auto v = trim(value);
    if (v == "true" || v == "1" || v == "yes") target = true;
    else if (v == "false" || v == "0" || v == "no") target = false;
    else throw ConfigError(field, "expected true or false, got '" + value + "'");
  };
}

Setter path(std::filesystem::path& target, const std::filesystem::path& base) {
  return [&target, base](const std::string&, const std::string& value) {
    std::filesystem::path p(std::string(trim(value)));
    target = p.is_relative() && !base.empty() ? base / p : p;
  };
}

Setter score_mode(ScoreMode& target) {
  return [&target](const std::string& field, const std::string& value) {
    const auto v = trim(value);
    if (v == "mixture") target = ScoreMode::mixture;
    else if (v == "gate") target = ScoreMode::gate;
    else throw ConfigError(field, "expected mixture or gate, got '" + value + "'");
  };
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  PipelineConfig c;
  auto& s = c.synth.spec;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"paths",
       {{"train", path(c.paths.train, base_dir)},
        {"test", path(c.paths.test, base_dir)},
        {"train_corpus", path(c.paths.train_corpus, base_dir)},
        {"test_corpus", path(c.paths.test_corpus, base_dir)},
        {"embeddings", path(c.paths.embeddings, base_dir)},
        {"work_dir", path(c.paths.work_dir, base_dir)}}},
      {"embedding",
       {{"dimension", integer(c.embedding.dimension)}, {"seed", integer(c.embedding.seed)}}},
      {"labelgraph",
       {{"rho", real(c.labelgraph.rho)},
        {"tau", real(c.labelgraph.tau)},
        {"order", integer(c.labelgraph.order)},
        {"clusters", integer(c.labelgraph.clusters)},
        {"batch_size", integer(c.labelgraph.batch_size)},
        {"sample_size", integer(c.labelgraph.sample_size)},
        {"iterations", integer(c.labelgraph.iterations)},
        {"restarts", integer(c.labelgraph.restarts)},
        {"seed", integer(c.labelgraph.seed)}}},
      {"keygraph",
       {{"window", integer(c.keygraph.textrank.window)},
        {"damping", real(c.keygraph.textrank.damping)},
        {"iterations", integer(c.keygraph.textrank.max_iterations)},
        {"keep_ratio", real(c.keygraph.textrank.keep_ratio)},
        {"tolerance", real(c.keygraph.textrank.tolerance)},
        {"weighted_edges", boolean(c.keygraph.weighted_edges)}}},
      {"matcher",
       {{"hidden_dim", integer(c.matcher.hidden_dim)},
        {"layers", integer(c.matcher.num_layers)},
        {"learning_rate", real(c.matcher.learning_rate)},
        {"momentum", real(c.matcher.momentum)},
        {"warmup_fraction", real(c.matcher.warmup_fraction)},
        {"max_epoch", integer(c.matcher.max_epoch)},
        {"batch_size", integer(c.matcher.batch_size)},
        {"patience", integer(c.matcher.patience)},
        {"validation_fraction", real(c.matcher.validation_fraction)},
        {"seed", integer(c.matcher.seed)},
        {"rebalance", boolean(c.matcher.rebalance)},
        {"learn_eps", boolean(c.matcher.learn_eps)},
        {"classifier_bias", boolean(c.matcher.classifier_bias)}}},
      {"ranker",
       {{"l2", real(c.ranker.logistic.l2)},
        {"tolerance", real(c.ranker.logistic.tolerance)},
        {"max_iterations", integer(c.ranker.logistic.max_iterations)},
        {"top_b", integer(c.ranker.top_b)},
        {"top_k", integer(c.ranker.top_k)},
        {"mode", score_mode(c.ranker.mode)}}},
      {"metrics", {{"a", real(c.metrics.a)}, {"b", real(c.metrics.b)}}},
      {"synth",
       {{"labels", integer(s.num_labels)},
        {"clusters", integer(s.num_clusters)},
        {"features", integer(s.num_features)},
        {"instances", integer(s.num_instances)},
        {"exponent", real(s.exponent)},
        {"noise", real(s.noise_rate)},
        {"seed", integer(s.seed)},
        {"extra_labels", real(s.extra_labels)},
        {"secondary_rate", real(s.secondary_rate)},
        {"sentences", integer(s.sentences)},
        {"sentence_length", integer(s.sentence_length)},
        {"cluster_vocabulary", integer(s.cluster_vocabulary)},
        {"label_vocabulary", integer(s.label_vocabulary)},
        {"noise_vocabulary", integer(s.noise_vocabulary)},
        {"interleave_clusters", boolean(s.interleave_clusters)},
        {"test_fraction", real(c.synth.test_fraction)}}},
  };

  for (const auto& [section, body] : tree) {
    const auto known = schema.find(section);
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, "keys must live inside a [section]");
    if (known == schema.end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const auto setter = known->second.find(key);
      if (setter == known->second.end()) throw ConfigError(field, "unknown key");
      setter->second(field, value.data());
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_config(in, path.parent_path());
}

void PipelineConfig::validate() const {
  require(embedding.dimension >= 1, "embedding.dimension", "must be >= 1");
  require(labelgraph.rho >= 0.0 && labelgraph.rho <= 1.0, "labelgraph.rho", "must lie in [0, 1]");
  require(labelgraph.tau > 0.0 && labelgraph.tau < 1.0, "labelgraph.tau", "must lie in (0, 1)");
  require(labelgraph.order >= 0, "labelgraph.order", "must be >= 0");
  require(labelgraph.clusters >= 0, "labelgraph.clusters", "must be >= 0 (0 = automatic)");
  require(labelgraph.batch_size >= 1, "labelgraph.batch_size", "must be >= 1");
  require(labelgraph.sample_size >= 0, "labelgraph.sample_size", "must be >= 0 (0 = exact)");
  require(labelgraph.iterations >= 1, "labelgraph.iterations", "must be >= 1");
  require(labelgraph.restarts >= 1, "labelgraph.restarts", "must be >= 1");
  require(keygraph.textrank.window >= 2, "keygraph.window", "must be >= 2");
  require(keygraph.textrank.damping > 0.0 && keygraph.textrank.damping < 1.0, "keygraph.damping",
          "must lie in (0, 1)");
  require(keygraph.textrank.max_iterations >= 1, "keygraph.iterations", "must be >= 1");
  require(keygraph.textrank.keep_ratio > 0.0 && keygraph.textrank.keep_ratio <= 1.0,
          "keygraph.keep_ratio", "must lie in (0, 1]");
  require(keygraph.textrank.tolerance >= 0.0, "keygraph.tolerance", "must be >= 0");
  matcher.validate();
  require(ranker.logistic.l2 > 0.0, "ranker.l2", "must be > 0");
  require(ranker.logistic.tolerance > 0.0, "ranker.tolerance", "must be > 0");
  require(ranker.logistic.max_iterations >= 1, "ranker.max_iterations", "must be >= 1");
  require(ranker.top_b >= 1, "ranker.top_b", "must be >= 1");
  require(ranker.top_k >= 1, "ranker.top_k", "must be >= 1");
  require(metrics.a > 0.0, "metrics.a", "must be > 0");
  require(metrics.b > 0.0, "metrics.b", "must be > 0");
  require(synth.test_fraction > 0.0 && synth.test_fraction < 1.0, "synth.test_fraction",
          "must lie in (0, 1)");
  try {
    synth.spec.validate();
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    const auto colon = what.find(':');
    throw ConfigError(what.substr(0, colon), what.substr(colon + 2));
  }
}

}  // namespace xmtc
