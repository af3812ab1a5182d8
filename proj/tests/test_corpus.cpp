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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "xmtc/corpus.hpp"
#include "xmtc/error.hpp"
#include "xmtc/synth.hpp"

using namespace xmtc;

namespace {

Dataset from_text(const std::string& text) {
  std::istringstream in(text);
  return read_xmc(in);
}

Dataset with_labels(std::vector<LabelSet> labels, Index num_labels, Index d = 1) {
  Dataset ds;
  ds.num_labels = num_labels;
  ds.labels = std::move(labels);
  ds.features.resize(ds.size(), d);
  return ds;
}

Dataset random_dataset(std::mt19937_64& rng, Index n, Index d, Index num_labels) {
  Dataset ds;
  ds.num_labels = num_labels;
  ds.labels = oracle::random_label_sets(rng, n, num_labels, 4);
  std::vector<Eigen::Triplet<double>> t;
  std::uniform_int_distribution<Index> col(0, d - 1);
  std::normal_distribution<double> val;
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) t.emplace_back(i, col(rng), val(rng));
  ds.features.resize(n, d);
  ds.features.setFromTriplets(t.begin(), t.end(), [](double, double b) { return b; });
  return ds;
}

}  // namespace

TEST(ParseXmc, ReadsHeaderDeclaredDimensions) {
  const Dataset ds = from_text("2 3 2\n0 0:1.0\n1 1:2.0 2:0.5\n");
  EXPECT_EQ(ds.size(), 2);
  EXPECT_EQ(ds.num_features(), 3);
  EXPECT_EQ(ds.num_labels, 2);
  EXPECT_EQ(ds.labels[0], LabelSet{0});
  EXPECT_EQ(ds.labels[1], LabelSet{1});
  EXPECT_DOUBLE_EQ(ds.features.coeff(1, 1), 2.0);
  EXPECT_DOUBLE_EQ(ds.features.coeff(1, 2), 0.5);
}

TEST(ParseXmc, FeatureOutOfBoundsIsRejected) {
  EXPECT_THROW(from_text("1 3 2\n0 5:1.0\n"), BoundsError);
  EXPECT_THROW(from_text("1 3 2\n2 0:1.0\n"), BoundsError);
}

TEST(ParseXmc, MalformedInputReportsLine) {
  EXPECT_THROW(from_text("two 3 2\n"), ParseError);
  try {
    from_text("2 3 2\n0 0:1.0\n1 1:abc\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseXmc, LabelsMayBeAbsent) {
  const Dataset ds = from_text("1 3 2\n 0:1.0 2:3.0\n");
  ASSERT_EQ(ds.size(), 1);
  EXPECT_TRUE(ds.labels[0].empty());
  EXPECT_DOUBLE_EQ(ds.features.coeff(0, 2), 3.0);
}

TEST(ParseXmc, RoundTripsGeneratedDatasets) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Dataset ds = random_dataset(rng, 15, 9, 7);
    std::stringstream buf;
    write_xmc(buf, ds);
    EXPECT_EQ(read_xmc(buf), ds);
  }
}

TEST(DatasetStats, AveragesOverTrainInstancesAndLabels) {
  const Dataset train = with_labels({{0, 1}, {0}}, 2);
  const Dataset test = with_labels({{1}}, 2);
  const DatasetStats s = dataset_stats(train, test);
  EXPECT_EQ(s.n_train, 2);
  EXPECT_EQ(s.n_test, 1);
  EXPECT_DOUBLE_EQ(s.avg_labels_per_instance, 1.5);
  EXPECT_DOUBLE_EQ(s.avg_instances_per_label, 1.5);
}

TEST(DatasetStats, Singleton) {
  const Dataset one = with_labels({{0}}, 1);
  const DatasetStats s = dataset_stats(one, one);
  EXPECT_DOUBLE_EQ(s.avg_labels_per_instance, 1.0);
  EXPECT_DOUBLE_EQ(s.avg_instances_per_label, 1.0);
}

TEST(DatasetStats, EmptyTrainingSetIsAnError) {
  EXPECT_THROW(dataset_stats(with_labels({}, 2), with_labels({{0}}, 2)), InvalidArgument);
}

TEST(LabelFrequencies, HandCount) {
  const Counts n = label_frequencies(with_labels({{0, 1}, {0}, {1, 2}}, 3));
  EXPECT_EQ(n, (Counts(3) << 2, 2, 1).finished());
  EXPECT_EQ(label_frequencies(with_labels({{}, {}}, 4)), Counts::Zero(4));
}

TEST(LabelFrequencies, SumMatchesRecountOnSyntheticData) {
  SynthSpec spec;
  spec.num_labels = 80;
  spec.num_clusters = 4;
  spec.num_instances = 600;
  const SynthData data = generate(spec);
  const Counts n = label_frequencies(data.dataset);
  Index total = 0;
  for (const auto& y : data.dataset.labels) total += static_cast<Index>(y.size());
  EXPECT_EQ(n.sum(), total);
  for (LabelId l = 0; l < 80; l += 7) {
    const auto c = std::count_if(data.dataset.labels.begin(), data.dataset.labels.end(),
                                 [&](const LabelSet& y) { return oracle::relevant(l, y); });
    EXPECT_EQ(n[l], c);
  }
}

TEST(Split, DeterministicPartition) {
  std::mt19937_64 rng(11);
  const Dataset ds = random_dataset(rng, 10, 5, 4);
  const auto [a_train, a_val] = split(ds, 0.2, 7);
  const auto [b_train, b_val] = split(ds, 0.2, 7);
  EXPECT_EQ(a_train.size(), 8);
  EXPECT_EQ(a_val.size(), 2);
  EXPECT_EQ(a_train, b_train);
  EXPECT_EQ(a_val, b_val);

  const SplitIndices s = split_indices(10, 0.2, 7);
  std::vector<Index> all = s.train;
  all.insert(all.end(), s.validation.begin(), s.validation.end());
  std::sort(all.begin(), all.end());
  std::vector<Index> expected(10);
  for (Index i = 0; i < 10; ++i) expected[i] = i;
  EXPECT_EQ(all, expected);
}

TEST(Split, DegenerateInputsAreErrors) {
  std::mt19937_64 rng(1);
  const Dataset one = random_dataset(rng, 1, 3, 2);
  EXPECT_THROW(split(one, 0.5, 1), InvalidArgument);
  const Dataset ten = random_dataset(rng, 10, 3, 2);
  EXPECT_THROW(split(ten, 0.0, 1), InvalidArgument);
  EXPECT_THROW(split(ten, 1.0, 1), InvalidArgument);
}

TEST(TextCorpus, SentencesAreTabSeparatedAndLowercased) {
  std::istringstream in("The cat sat.\tIt purred.\n\n");
  const TextCorpus c = read_text_corpus(in);
  ASSERT_EQ(c.size(), 2);
  const auto& doc = c.documents[0];
  ASSERT_EQ(doc.sentences.size(), 2u);
  EXPECT_EQ(doc.sentences[0], (Sentence{"the", "cat", "sat"}));
  EXPECT_EQ(doc.sentences[1], (Sentence{"it", "purred"}));
  EXPECT_TRUE(c.documents[1].sentences.empty());
}

TEST(TextCorpus, RoundTrip) {
  SynthSpec spec;
  spec.num_labels = 20;
  spec.num_clusters = 2;
  spec.num_instances = 30;
  const TextCorpus corpus = generate(spec).corpus;
  std::stringstream buf;
  write_text_corpus(buf, corpus);
  EXPECT_EQ(read_text_corpus(buf), corpus);
}

TEST(TextCorpus, UnreadableFileIsAnIoError) {
  EXPECT_THROW(parse_text_corpus("/nonexistent/corpus.txt"), IoError);
}
