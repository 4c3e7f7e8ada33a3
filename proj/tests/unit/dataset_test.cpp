// Copyright 2026 The lcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcnn/dataset.hpp"
#include "lcnn/random.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace lcnn {
namespace {

Dataset column(std::initializer_list<double> values) {
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) {
    d.features(i++, 0) = v;
    d.labels.push_back(0);
  }
  d.class_labels = {0.0};
  return d;
}

TEST(ParseLibsvm, SparseRowsAndSortedLabelMap) {
  const Dataset d = parse_libsvm("1 1:0.5 3:1.0\n-1 2:2.0");
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.n_features(), 3u);
  EXPECT_EQ(d.features(0, 0), 0.5);
  EXPECT_EQ(d.features(0, 1), 0.0);
  EXPECT_EQ(d.features(0, 2), 1.0);
  EXPECT_EQ(d.features(1, 1), 2.0);
  EXPECT_EQ(d.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(d.class_labels, (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(d.class_index(-1.0), 0);
  EXPECT_FALSE(d.class_index(7.0).has_value());
}

TEST(ParseLibsvm, EmptyInputIsAnError) {
  EXPECT_THROW(parse_libsvm(""), Error);
  EXPECT_THROW(parse_libsvm("\n\n"), Error);
}

TEST(ParseLibsvm, PlusLabelsCommentsAndBlankLines) {
  const Dataset d = parse_libsvm("+1 1:1 # comment\n\n-1 2:1\n");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.class_labels, (std::vector<double>{-1.0, 1.0}));
}

TEST(ParseLibsvm, ErrorsCarryLineNumbers) {
  try {
    parse_libsvm("1 1:0.5\n2 3:1 2:4\n");
    FAIL() << "non-ascending indices accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_libsvm("1 1:0.5\n1 1:0.5\nx 1:2\n");
    FAIL() << "non-numeric label accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_libsvm("1 0:1\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 1:abc\n"), ParseError);
  EXPECT_THROW(parse_libsvm("1 1:1 1:2\n"), ParseError);
}

TEST(ParseLibsvm, WidthHint) {
  EXPECT_EQ(parse_libsvm("1 2:1\n", 5).n_features(), 5u);
  EXPECT_EQ(parse_libsvm("1 6:1\n", 5).n_features(), 6u);  // the hint is a minimum
}

TEST(ParseLibsvm, RoundTripsThroughText) {
  const Dataset d = parse_libsvm("3 1:0.1 4:-2.5e-3\n1 2:7\n2 3:0.3333333333333333\n");
  const Dataset back = parse_libsvm(to_libsvm(d), d.n_features());
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.class_labels, d.class_labels);
}

TEST(ReadLibsvmFiles, SharedWidthAndLabelMap) {
  const auto dir = std::filesystem::temp_directory_path() / "lcnn_dataset_test";
  std::filesystem::create_directories(dir);
  const std::vector<std::filesystem::path> paths = {dir / "a", dir / "b"};
  std::ofstream(paths[0]) << "1 1:1\n2 2:1\n";
  std::ofstream(paths[1]) << "3 4:1\n";
  const auto sets = read_libsvm_files(paths);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].n_features(), 4u);
  EXPECT_EQ(sets[1].n_features(), 4u);
  EXPECT_EQ(sets[0].class_labels, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(sets[1].labels, (std::vector<int>{2}));
  EXPECT_THROW(read_libsvm_file(dir / "missing"), Error);
}

Dataset ten_rows() {
  std::string text;
  for (int i = 0; i < 10; ++i) text += std::to_string(i % 2) + " 1:" + std::to_string(i) + "\n";
  return parse_libsvm(text);
}

TEST(Split, SizesAndDeterminism) {
  const Dataset d = ten_rows();
  const SplitSpec spec{0.8, 0.1, 0.1, 7};
  const Splits a = split(d, spec);
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.val.size(), 1u);
  EXPECT_EQ(a.test.size(), 1u);
  const Splits b = split(d, spec);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_EQ(a.val.features, b.val.features);
  EXPECT_EQ(a.test.features, b.test.features);
  // The three parts partition the rows.
  std::vector<double> seen;
  for (const Dataset* s : {&a.train, &a.val, &a.test}) {
    for (Eigen::Index i = 0; i < s->features.rows(); ++i) seen.push_back(s->features(i, 0));
  }
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(seen[static_cast<std::size_t>(i)], i);
  EXPECT_NE(split(d, {0.8, 0.1, 0.1, 8}).train.features, a.train.features);
}

TEST(Split, EmptyPartsAndBadFractions) {
  const Dataset d = ten_rows();
  EXPECT_THROW(split(d, {0.5, 0.5, 0.0, 1}), Error);
  EXPECT_THROW(split(d, {0.5, 0.4, 0.2, 1}), Error);
  EXPECT_THROW(split(d, {1.0, 0.0, 0.0, 1}), Error);
  EXPECT_THROW(split(d, {-0.1, 0.6, 0.5, 1}), Error);
}

TEST(Standardize, TwoPointColumn) {
  const Dataset train = column({1.0, 3.0});
  const Standardized s = standardize(train);
  EXPECT_DOUBLE_EQ(s.scaler.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(s.scaler.stddev(0), 1.0);
  EXPECT_DOUBLE_EQ(s.train.features(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.train.features(1, 0), 1.0);
}

TEST(Standardize, ConstantColumnMapsToZero) {
  const Standardized s = standardize(column({5.0, 5.0}));
  EXPECT_EQ(s.train.features(0, 0), 0.0);
  EXPECT_EQ(s.train.features(1, 0), 0.0);
}

TEST(Standardize, OthersUseTrainStatistics) {
  const std::vector<Dataset> others = {column({4.0})};
  const Standardized s = standardize(column({1.0, 3.0}), others);
  ASSERT_EQ(s.others.size(), 1u);
  EXPECT_DOUBLE_EQ(s.others[0].features(0, 0), 2.0);
}

TEST(Standardize, MomentsOfRandomColumns) {
  Dataset d;
  d.features.resize(200, 6);
  Rng rng(3);
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) d.features(i, j) = 10.0 * j + (j + 1) * rng.normal();
    d.labels.push_back(0);
  }
  d.class_labels = {0.0};
  const Standardized s = standardize(d);
  for (Eigen::Index j = 0; j < 6; ++j) {
    const auto col = s.train.features.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_LT(std::abs(std::sqrt(var) - 1.0), 1e-9);
  }
}

TEST(Standardize, WidthMismatchIsAnError) {
  const FeatureScaler sc = FeatureScaler::fit(column({1.0, 2.0}));
  Dataset wide;
  wide.features = RowMatrix::Zero(1, 2);
  wide.labels = {0};
  wide.class_labels = {0.0};
  EXPECT_THROW(sc.apply(wide), Error);
}

}  // namespace
}  // namespace lcnn
