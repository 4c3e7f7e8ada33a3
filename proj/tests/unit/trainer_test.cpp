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

#include "lcnn/trainer.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace lcnn {
namespace {

// Two Gaussian-free blobs on either side of x0 + x1 = 0.
Dataset separable(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(m), 2);
  d.class_labels = {0, 1};
  for (std::size_t i = 0; i < m; ++i) {
    const int y = static_cast<int>(i % 2);
    const double side = y == 1 ? 1.0 : -1.0;
    d.features(static_cast<Eigen::Index>(i), 0) = side * rng.uniform(0.5, 2.0);
    d.features(static_cast<Eigen::Index>(i), 1) = side * rng.uniform(0.5, 2.0);
    d.labels.push_back(y);
  }
  return d;
}

TEST(LearningRate, DecaysAsOneOverEpoch) {
  EXPECT_DOUBLE_EQ(lr_at_epoch(0.1, 1), 0.1);
  EXPECT_DOUBLE_EQ(lr_at_epoch(0.1, 2), 0.05);
  EXPECT_DOUBLE_EQ(lr_at_epoch(0.01, 500), 2e-5);
  EXPECT_THROW(lr_at_epoch(0.1, 0), Error);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.lr0 = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.normalization = SampleNormalization::sum;
  EXPECT_DOUBLE_EQ(c.sample_scale(100, 10), 10.0);
  c.normalization = SampleNormalization::mean;
  EXPECT_DOUBLE_EQ(c.sample_scale(100, 10), 0.1);
}

TEST(EpochOrder, PermutationAndDeterminism) {
  const auto a = epoch_order(3, 1, 50);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_EQ(a, epoch_order(3, 1, 50));
  EXPECT_NE(a, epoch_order(3, 2, 50));
}

TEST(Train, SeparableToyReachesPerfectAccuracy) {
  const Dataset d = separable(20, 1);
  TrainConfig c;
  c.epochs = 50;
  c.batch_size = 4;
  c.keep_best = false;
  const TrainResult r = train(init_mlp(std::vector<std::size_t>{2, 2}, 3), d, d, c);
  EXPECT_EQ(accuracy(r.model, d), 1.0);
  EXPECT_EQ(r.history.epochs.size(), 50u);
  EXPECT_EQ(r.history.selected_epoch, 50u);
}

TEST(Train, HugeDataDependentPenaltyCollapsesToMajority) {
  Rng rng(4);
  Dataset d = testing::random_dataset(40, 3, 2, rng);
  for (std::size_t i = 0; i < d.size(); ++i) d.labels[i] = i < 30 ? 0 : 1;  // 75% majority
  TrainConfig c;
  c.epochs = 30;
  c.batch_size = 1;
  c.lr0 = 1e-4;
  c.keep_best = false;
  c.spec = {0, 1e3, 0, Scope::all_layers};
  c.normalization = SampleNormalization::mean;
  const TrainResult r = train(init_mlp(std::vector<std::size_t>{3, 4, 2}, 1), d, d, c);
  const BatchTrace t = forward_batch(r.model, d.features);
  EXPECT_LT(t.scores.cwiseAbs().maxCoeff(), 1e-2);
  EXPECT_NEAR(accuracy(r.model, d), 0.75, 0.05);
}

// Full-batch gradient descent on a linear hinge-only model, coded directly.
TEST(Train, MatchesHandWrittenFullBatchDescent) {
  Rng rng(8);
  const Dataset d = testing::random_dataset(12, 3, 3, rng);
  const Mlp init = init_mlp(std::vector<std::size_t>{3, 3}, 6);
  TrainConfig c;
  c.epochs = 4;
  c.batch_size = d.size();
  c.lr0 = 0.5;
  c.keep_best = false;
  c.normalization = SampleNormalization::mean;
  const TrainResult r = train(init, d, d, c);

  Matrix w = init.classifier.weights;
  Vector b = init.classifier.biases;
  for (std::size_t epoch = 1; epoch <= c.epochs; ++epoch) {
    Matrix gw = Matrix::Zero(3, 3);
    Vector gb = Vector::Zero(3);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Vector x = d.features.row(static_cast<Eigen::Index>(i)).transpose();
      const Vector s = w * x + b;
      const int y = d.labels[i];
      for (int j = 0; j < 3; ++j) {
        if (j == y || 1.0 - s(y) + s(j) <= 0.0) continue;
        gw.row(j) += x.transpose();
        gw.row(y) -= x.transpose();
        gb(j) += 1.0;
        gb(y) -= 1.0;
      }
    }
    const double lr = c.lr0 / static_cast<double>(epoch) / static_cast<double>(d.size());
    w -= lr * gw;
    b -= lr * gb;
  }
  EXPECT_TRUE(r.model.classifier.weights.isApprox(w, 1e-12));
  EXPECT_TRUE(r.model.classifier.biases.isApprox(b, 1e-12));
}

TEST(Train, DeterministicBitForBit) {
  const Dataset d = separable(30, 2);
  TrainConfig c;
  c.epochs = 5;
  c.seed = 9;
  c.spec = {1e-3, 1e-4, 0, Scope::all_layers};
  const Mlp init = init_mlp(std::vector<std::size_t>{2, 5, 2}, 4);
  const TrainResult a = train(init, d, d, c);
  const TrainResult b = train(init, d, d, c);
  for (std::size_t h = 0; h < a.model.n_layers(); ++h) {
    EXPECT_EQ(a.model.layer(h).weights, b.model.layer(h).weights);
    EXPECT_EQ(a.model.layer(h).biases, b.model.layer(h).biases);
  }
}

TEST(Train, DivergenceIsReported) {
  Dataset d = separable(20, 3);
  d.features *= 1e150;
  TrainConfig c;
  c.epochs = 3;
  c.lr0 = 1e100;
  c.spec = {0, 1.0, 0, Scope::last_layer};
  EXPECT_THROW(train(init_mlp(std::vector<std::size_t>{2, 2}, 1), d, d, c), DivergenceError);
}

TEST(Train, MasksSurviveUpdates) {
  const Dataset d = separable(20, 5);
  Mlp m = init_mlp(std::vector<std::size_t>{2, 3, 2}, 2);
  m.hidden[0].mask = Mask::Constant(3, 2, true);
  m.hidden[0].mask(0, 0) = false;
  m.hidden[0].apply_mask();
  TrainConfig c;
  c.epochs = 3;
  c.spec = {0.1, 0, 0.1, Scope::none};
  const TrainResult r = train(m, d, d, c);
  EXPECT_EQ(r.model.hidden[0].weights(0, 0), 0.0);
}

TEST(Combo, ParseAndName) {
  const Combo c = Combo::parse("H+W1+LCA");
  EXPECT_TRUE(c.l1);
  EXPECT_FALSE(c.l2);
  EXPECT_EQ(c.scope, Scope::all_layers);
  EXPECT_EQ(c.name(), "H+W1+LCA");
  EXPECT_EQ(Combo::parse("H+W").name(), "H+W2");
  EXPECT_EQ(Combo::parse("H+LCL").make_spec(0.5, 0.25).D, 0.25);
  EXPECT_EQ(Combo::parse("H+W1").make_spec(0.5, 0.25).l1, 0.5);
  EXPECT_EQ(Combo::parse("H+W2").make_spec(0.5, 0.25).C, 0.5);
  EXPECT_THROW(Combo::parse("W1"), Error);
  EXPECT_THROW(Combo::parse("H+D"), Error);
  EXPECT_THROW(Combo::parse("H+BN"), Error);
  EXPECT_THROW(Combo::parse("H+W1+W2"), Error);
  EXPECT_THROW(Combo::parse("H+LCA+LCL"), Error);
  EXPECT_THROW(Combo::parse("H+Q"), Error);
}

TEST(Grid, CountsAndCollapse) {
  const GridSpec g = GridSpec::defaults();
  EXPECT_EQ(expand_grid(Combo::parse("H+W2+LCA"), g).size(), 40u);
  EXPECT_EQ(expand_grid(Combo::parse("H"), g).size(), 2u);
  EXPECT_EQ(expand_grid(Combo::parse("H+W1"), g).size(), 8u);
  EXPECT_EQ(expand_grid(Combo::parse("H+LCL"), g).size(), 10u);
  const auto cells = expand_grid(Combo::parse("H"), g);
  EXPECT_EQ(cells[0].c, 0.0);
  EXPECT_EQ(cells[0].lr, 1e-2);
  EXPECT_EQ(cells[1].lr, 1e-1);
}

TEST(Grid, TiesGoToSmallerC) {
  // Every cell reaches 100% on a separable set; the smallest C must win.
  const Dataset d = separable(20, 6);
  GridSpec g{{1e-3, 1e-4}, {0.0}, {0.1}};
  TrainConfig base;
  base.epochs = 20;
  base.batch_size = 4;
  const std::vector<std::size_t> widths = {2, 2};
  const GridResult r = grid_search(d, d, widths, Combo::parse("H+W2"), g, base, {1, 2});
  ASSERT_EQ(r.runs.size(), 2u);
  EXPECT_EQ(r.runs[0].val_accuracy, 1.0);
  EXPECT_EQ(r.runs[1].val_accuracy, 1.0);
  EXPECT_EQ(r.cell.c, 1e-4);
  EXPECT_EQ(r.config.spec.C, 1e-4);
}

TEST(Grid, ThreadCountDoesNotChangeResults) {
  const Dataset d = separable(24, 7);
  GridSpec g{{1e-4, 1e-2}, {0.0}, {1e-2, 1e-1}};
  TrainConfig base;
  base.epochs = 4;
  const std::vector<std::size_t> widths = {2, 3, 2};
  const GridResult a = grid_search(d, d, widths, Combo::parse("H+W1"), g, base, {5, 1});
  const GridResult b = grid_search(d, d, widths, Combo::parse("H+W1"), g, base, {5, 3});
  EXPECT_EQ(a.model.classifier.weights, b.model.classifier.weights);
  std::ostringstream ca, cb;
  write_grid_csv(ca, a.runs);
  write_grid_csv(cb, b.runs);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Grid, AllDivergedIsAnError) {
  Dataset d = separable(10, 8);
  d.features *= 1e150;
  GridSpec g{{0.0}, {1.0}, {1e100}};
  TrainConfig base;
  base.epochs = 2;
  const std::vector<std::size_t> widths = {2, 2};
  EXPECT_THROW(grid_search(d, d, widths, Combo::parse("H+LCL"), g, base), DivergenceError);
}

TEST(History, CsvHasOneRowPerEpoch) {
  const Dataset d = separable(10, 9);
  TrainConfig c;
  c.epochs = 3;
  const TrainResult r = train(init_mlp(std::vector<std::size_t>{2, 2}, 1), d, d, c);
  std::ostringstream out;
  write_history_csv(out, r.history);
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
  EXPECT_EQ(s.rfind("epoch,lr,", 0), 0u);
}

}  // namespace
}  // namespace lcnn
