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

#include "xmtc/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "xmtc/error.hpp"
#include "xmtc/keygraph.hpp"
#include "xmtc/matcher.hpp"
#include "xmtc/metrics.hpp"
#include "xmtc/parallel.hpp"
#include "xmtc/rank.hpp"
#include "xmtc/synth.hpp"
#include "xmtc/text_io.hpp"

namespace xmtc {

namespace fs = std::filesystem;

namespace {

fs::path in_work(const PipelineConfig& c, std::string_view name) { return c.paths.work_dir / name; }

fs::path require(const PipelineConfig& c, std::string_view name, std::string_view stage) {
  fs::path p = in_work(c, name);
  if (!fs::exists(p))
    throw DependencyError("missing " + p.string() + "; run " + std::string(stage) + " first");
  return p;
}

Dataset load_dataset(const fs::path& p) { return parse_xmc(p); }

LabelClusters load_clusters(const fs::path& p) {
  auto in = open_input(p);
  return read_clusters(in);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string secs(const Stopwatch& w) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << w.seconds() << "s";
  return s.str();
}

void check_alignment(const Dataset& ds, const TextCorpus& corpus, std::string_view what) {
  if (ds.size() != corpus.size())
    throw FormatError(std::string(what) + ": dataset has " + std::to_string(ds.size()) +
                      " instances but corpus has " + std::to_string(corpus.size()) + " documents");
}

}  // namespace

WorkDirLock::WorkDirLock(const fs::path& work_dir) : path_(work_dir / ".lock") {
  fs::create_directories(work_dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f)
    throw DependencyError("work directory " + work_dir.string() +
                          " is locked by another run (remove " + path_.string() + " if stale)");
  std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
  std::fclose(f);
}

WorkDirLock::~WorkDirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

TextCorpus load_corpus(const fs::path& path, std::string_view prefix) {
  TextCorpus corpus = parse_text_corpus(path);
  for (std::size_t i = 0; i < corpus.documents.size(); ++i)
    corpus.documents[i].id = std::string(prefix) + "-" + std::to_string(i);
  return corpus;
}

std::unique_ptr<EmbeddingProvider> make_embedding(const PipelineConfig& config,
                                                  const TextCorpus& train_corpus) {
  if (!config.paths.embeddings.empty())
    return std::make_unique<PrecomputedEmbedding>(PrecomputedEmbedding::load(config.paths.embeddings));
  return std::make_unique<TfidfEmbedding>(
      TfidfEmbedding::fit(train_corpus, config.embedding.dimension, config.embedding.seed));
}

Eigen::MatrixXd filtered_label_embeddings(const LabelGraph& graph, const Dataset& train,
                                          const Eigen::MatrixXd& instance_embeddings,
                                          const LabelGraphConfig& config) {
  const Eigen::MatrixXd z = label_embeddings(train.labels, train.num_labels, instance_embeddings);
  if (config.sample_size > 0)
    return sampled_lowpass_filter(graph.adjacency, z, config.order,
                                  {config.batch_size, config.sample_size, config.seed});
  return lowpass_filter(graph.adjacency, z, config.order);
}

LabelClusters cluster_labels(const Eigen::MatrixXd& label_embeddings,
                             const LabelGraphConfig& config) {
  const Index num_labels = label_embeddings.rows();
  const Index k = config.clusters > 0 ? config.clusters : default_cluster_count(num_labels);
  // Labels without training instances embed to the origin; they would form
  // a spurious tight cluster, so they are placed after fitting.
  std::vector<Index> present;
  for (Index l = 0; l < num_labels; ++l)
    if (label_embeddings.row(l).squaredNorm() > 0.0) present.push_back(l);
  if (static_cast<Index>(present.size()) < k)
    throw InvalidArgument("cluster: only " + std::to_string(present.size()) +
                          " labels have training instances, fewer than K = " + std::to_string(k));
  const Eigen::MatrixXd points = label_embeddings(present, Eigen::all);

  LabelClusters best;
  double best_inertia = 0.0;
  for (Index r = 0; r < config.restarts; ++r) {
    KMeansOptions opt{k, config.batch_size, config.iterations,
                      config.seed + static_cast<std::uint64_t>(r)};
    LabelClusters c = minibatch_kmeans(points, opt);
    const double j = inertia(points, c);
    if (r == 0 || j < best_inertia) {
      best_inertia = j;
      best = std::move(c);
    }
  }

  LabelClusters out;
  out.num_clusters = k;
  out.centroids = best.centroids;
  out.assignment.assign(static_cast<std::size_t>(num_labels), -1);
  for (std::size_t i = 0; i < present.size(); ++i) out.assignment[present[i]] = best.assignment[i];
  for (Index l = 0; l < num_labels; ++l) {
    if (out.assignment[l] >= 0) continue;
    Index nearest = 0;
    for (Index c = 1; c < k; ++c)
      if (out.centroids.row(c).squaredNorm() < out.centroids.row(nearest).squaredNorm()) nearest = c;
    out.assignment[l] = nearest;
  }
  return out;
}

void run_synth(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  WorkDirLock lock(config.paths.work_dir);
  const SynthData data = generate(config.synth.spec);
  const auto s = split_indices(data.dataset.size(), config.synth.test_fraction, config.synth.spec.seed);
  write_xmc(in_work(config, artifact::train), data.dataset.subset(s.train));
  write_xmc(in_work(config, artifact::test), data.dataset.subset(s.validation));
  write_text_corpus(in_work(config, artifact::train_corpus), data.corpus.subset(s.train));
  write_text_corpus(in_work(config, artifact::test_corpus), data.corpus.subset(s.validation));
  LabelClusters planted{data.true_clusters, config.synth.spec.num_clusters, {}};
  auto out = open_output(in_work(config, artifact::planted_clusters));
  write_clusters(out, planted);
  log << "synth: " << s.train.size() << " train / " << s.validation.size() << " test instances, "
      << config.synth.spec.num_labels << " labels, " << config.synth.spec.num_clusters
      << " planted clusters (" << secs(w) << ")\n";
}

void run_ingest(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto& p = config.paths;
  for (const auto& [file, key] : {std::pair{p.train, "paths.train"}, {p.test, "paths.test"},
                                  {p.train_corpus, "paths.train_corpus"},
                                  {p.test_corpus, "paths.test_corpus"}})
    if (file.empty()) throw ConfigError(key, "required by ingest");
  WorkDirLock lock(p.work_dir);
  const Dataset train = parse_xmc(p.train);
  const Dataset test = parse_xmc(p.test);
  if (train.num_features() != test.num_features() || train.num_labels != test.num_labels)
    throw FormatError("train and test headers disagree on feature or label counts");
  const TextCorpus train_text = parse_text_corpus(p.train_corpus);
  const TextCorpus test_text = parse_text_corpus(p.test_corpus);
  check_alignment(train, train_text, "train");
  check_alignment(test, test_text, "test");
  write_xmc(in_work(config, artifact::train), train);
  write_xmc(in_work(config, artifact::test), test);
  write_text_corpus(in_work(config, artifact::train_corpus), train_text);
  write_text_corpus(in_work(config, artifact::test_corpus), test_text);
  log << "ingest: " << train.size() << " train / " << test.size() << " test instances, "
      << train.num_labels << " labels, " << train.num_features() << " features (" << secs(w) << ")\n";
}

void run_build_label_graph(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto train_path = require(config, artifact::train, "ingest");
  const auto corpus_path = require(config, artifact::train_corpus, "ingest");
  WorkDirLock lock(config.paths.work_dir);
  const Dataset train = load_dataset(train_path);
  const TextCorpus corpus = load_corpus(corpus_path, "train");
  check_alignment(train, corpus, "train");
  const LabelGraph graph = LabelGraph::build(train.labels, train.num_labels, config.labelgraph.rho,
                                             config.labelgraph.tau);
  {
    auto out = open_output(in_work(config, artifact::label_graph));
    out << graph.num_labels() << '\n';
    write_triplets(out, graph.adjacency);
  }
  const auto provider = make_embedding(config, corpus);
  const Eigen::MatrixXd z =
      filtered_label_embeddings(graph, train, embed_documents(corpus, *provider), config.labelgraph);
  auto out = open_output(in_work(config, artifact::embeddings));
  write_matrix(out, z);
  log << "build-label-graph: " << graph.num_labels() << " labels, " << graph.num_edges()
      << " edges, filter order " << config.labelgraph.order << ", embedding dim " << z.cols()
      << " (" << secs(w) << ")\n";
}

void run_cluster(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto emb_path = require(config, artifact::embeddings, "build-label-graph");
  WorkDirLock lock(config.paths.work_dir);
  auto in = open_input(emb_path);
  const Eigen::MatrixXd z = read_matrix(in);
  const LabelClusters clusters = cluster_labels(z, config.labelgraph);
  auto out = open_output(in_work(config, artifact::clusters));
  write_clusters(out, clusters);
  log << "cluster: " << clusters.num_labels() << " labels into " << clusters.num_clusters
      << " clusters, largest " << clusters.max_cluster_size() << ", inertia "
      << format_double(inertia(z, clusters)) << " (" << secs(w) << ")\n";
}

void run_train_matcher(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto train_path = require(config, artifact::train, "ingest");
  const auto corpus_path = require(config, artifact::train_corpus, "ingest");
  const auto clusters_path = require(config, artifact::clusters, "cluster");
  WorkDirLock lock(config.paths.work_dir);
  const Dataset train = load_dataset(train_path);
  const TextCorpus corpus = load_corpus(corpus_path, "train");
  check_alignment(train, corpus, "train");
  const LabelClusters clusters = load_clusters(clusters_path);
  const auto provider = make_embedding(config, corpus);
  const auto graphs = make_graph_inputs(corpus, *provider, config.keygraph);
  const Eigen::MatrixXd targets = cluster_targets(train.labels, clusters);
  const TrainResult result =
      train_matcher(graphs, targets, train.labels, train.num_labels, config.matcher);
  save_matcher(in_work(config, artifact::matcher).string(), result.model);
  const EpochLog& best = result.history[static_cast<std::size_t>(
      std::find_if(result.history.begin(), result.history.end(),
                   [&](const EpochLog& e) { return e.epoch == result.best_epoch; }) -
      result.history.begin())];
  log << "train-matcher: " << result.history.size() << " epochs, best epoch " << result.best_epoch
      << ", train loss " << format_double(best.train_loss) << ", validation loss "
      << format_double(best.validation_loss) << (config.matcher.rebalance ? "" : ", conventional only")
      << " (" << secs(w) << ")\n";
}

void run_train_rankers(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto train_path = require(config, artifact::train, "ingest");
  const auto clusters_path = require(config, artifact::clusters, "cluster");
  WorkDirLock lock(config.paths.work_dir);
  const Dataset train = load_dataset(train_path);
  const LabelClusters clusters = load_clusters(clusters_path);
  const LabelClassifiers rankers = train_label_classifiers(train, clusters, config.ranker.logistic);
  auto out = open_output(in_work(config, artifact::rankers));
  write_classifiers(out, rankers);
  Index trained = 0;
  for (const auto& c : rankers.labels) trained += c.trained;
  log << "train-rankers: " << trained << " of " << rankers.num_labels() << " labels trained ("
      << secs(w) << ")\n";
}

void run_predict(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto train_corpus_path = require(config, artifact::train_corpus, "ingest");
  const auto test_path = require(config, artifact::test, "ingest");
  const auto test_corpus_path = require(config, artifact::test_corpus, "ingest");
  const auto clusters_path = require(config, artifact::clusters, "cluster");
  const auto matcher_path = require(config, artifact::matcher, "train-matcher");
  const auto rankers_path = require(config, artifact::rankers, "train-rankers");
  WorkDirLock lock(config.paths.work_dir);
  const Dataset test = load_dataset(test_path);
  const TextCorpus test_text = load_corpus(test_corpus_path, "test");
  check_alignment(test, test_text, "test");
  const LabelClusters clusters = load_clusters(clusters_path);
  const Matcher model = load_matcher(matcher_path.string());
  LabelClassifiers rankers;
  {
    auto in = open_input(rankers_path);
    rankers = read_classifiers(in);
  }
  const auto provider = make_embedding(config, load_corpus(train_corpus_path, "train"));

  const auto n = static_cast<std::size_t>(test.size());
  std::vector<std::vector<ScoredLabel>> predictions(n);
  std::vector<PredictionCost> costs(n);
  parallel_for(n, [&](std::size_t i) {
    const GraphInput g = make_graph_input(test_text.documents[i], *provider, config.keygraph);
    const Eigen::VectorXd scores = cluster_scores(model, g, &costs[i]);
    predictions[i] = top_k(score_labels(instance_vector(test.features, static_cast<Index>(i)), scores,
                                        rankers, clusters, config.ranker.top_b, config.ranker.mode,
                                        &costs[i]),
                           config.ranker.top_k);
  });
  auto out = open_output(in_work(config, artifact::predictions));
  write_predictions(out, predictions);
  double evals = 0.0;
  for (const auto& c : costs) evals += static_cast<double>(c.classifier_evaluations);
  log << "predict: " << n << " instances, " << format_double(n ? evals / static_cast<double>(n) : 0.0)
      << " classifier evaluations per instance (" << secs(w) << ")\n";
}

void run_evaluate(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const auto train_path = require(config, artifact::train, "ingest");
  const auto test_path = require(config, artifact::test, "ingest");
  const auto pred_path = require(config, artifact::predictions, "predict");
  WorkDirLock lock(config.paths.work_dir);
  const Dataset train = load_dataset(train_path);
  const Dataset test = load_dataset(test_path);
  std::vector<std::vector<ScoredLabel>> predictions;
  {
    auto in = open_input(pred_path);
    predictions = read_predictions(in);
  }
  const auto prop = PropensityModel::fit(label_frequencies(train), train.size(), config.metrics.a,
                                         config.metrics.b);
  const EvalReport report = evaluate(rankings(predictions), test.labels, prop.p);
  {
    auto out = open_output(in_work(config, artifact::report));
    write_report_table(out, report);
  }
  {
    auto out = open_output(in_work(config, artifact::report_kv));
    write_report_kv(out, report);
  }
  write_report_table(log, report);
  log << "evaluate: " << report.num_instances << " instances (" << secs(w) << ")\n";
}

void run_stats(const PipelineConfig& config, std::ostream& log) {
  Stopwatch w;
  const fs::path train_path =
      !config.paths.train.empty() ? config.paths.train : require(config, artifact::train, "ingest");
  const fs::path test_path =
      !config.paths.test.empty() ? config.paths.test : require(config, artifact::test, "ingest");
  const Dataset train = load_dataset(train_path);
  const Dataset test = load_dataset(test_path);
  const DatasetStats s = dataset_stats(train, test);
  log << std::fixed << std::setprecision(2) << "stats: N_train=" << s.n_train
      << " N_test=" << s.n_test << " D=" << s.num_features << " L=" << s.num_labels
      << " Lbar=" << s.avg_labels_per_instance << " Lhat=" << s.avg_instances_per_label;
  log.unsetf(std::ios::fixed);

  const bool can_write = fs::is_directory(config.paths.work_dir);
  const Counts n = label_frequencies(train);
  constexpr Index kLine = 20;
  log << " labels>" << kLine << "=" << format_double(fraction_above(n, kLine));
  if (can_write) {
    auto out = open_output(in_work(config, artifact::label_histogram));
    out << "label\tinstances\n";
    for (Index l = 0; l < n.size(); ++l) out << l << '\t' << n[l] << '\n';
  }
  const fs::path clusters_path = in_work(config, artifact::clusters);
  if (fs::exists(clusters_path)) {
    const LabelClusters clusters = load_clusters(clusters_path);
    const Counts h = cluster_instance_histogram(train.labels, clusters);
    log << " clusters>" << kLine << "=" << format_double(fraction_above(h, kLine));
    auto out = open_output(in_work(config, artifact::cluster_histogram));
    out << "cluster\tinstances\n";
    for (Index c = 0; c < h.size(); ++c) out << c << '\t' << h[c] << '\n';
  }
  log << " (" << secs(w) << ")\n";
}

}  // namespace xmtc
