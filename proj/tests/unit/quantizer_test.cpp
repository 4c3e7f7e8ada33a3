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

#include "lcnn/quantizer.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace lcnn {
namespace {

TEST(QuantizeValue, HandCases) {
  EXPECT_EQ(quantize_value(0.25, {8, 4}), 0.25);
  EXPECT_EQ(quantize_value(0.3, {8, 4}), 0.25);
  EXPECT_EQ(quantize_value(-0.3, {8, 4}), -0.25);
  EXPECT_EQ(quantize_value(3.0, {4, 2}), 1.75);
  EXPECT_EQ(quantize_value(-3.0, {4, 2}), -1.75);
  EXPECT_EQ(quantize_value(0.3, {8, 4, Rounding::nearest}), 0.3125);
  EXPECT_EQ(quantize_value(0.25 + 1.0 / 32, {8, 4, Rounding::nearest}), 0.3125);  // half away from zero
  EXPECT_EQ(quantize_value(0.49999999999999994, {4, 0, Rounding::nearest}), 0.0);
}

TEST(QuantizeValue, SpecialValues) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(quantize_value(nan, {8, 4}), 0.0);
  EXPECT_EQ(quantize_value(std::numeric_limits<double>::infinity(), {8, 4}), 127.0 / 16);
  EXPECT_EQ(quantize_value(-std::numeric_limits<double>::infinity(), {8, 4}), -127.0 / 16);
  EXPECT_FALSE(std::signbit(quantize_value(-1e-9, {8, 4})));  // no negative zero
}

TEST(FixedPointFormat, Validation) {
  EXPECT_THROW((FixedPointFormat{1, 0}.validate()), Error);
  EXPECT_THROW((FixedPointFormat{17, 0}.validate()), Error);
  EXPECT_THROW((FixedPointFormat{8, 8}.validate()), Error);
  EXPECT_THROW((FixedPointFormat{8, -1}.validate()), Error);
  EXPECT_EQ((FixedPointFormat{4, 2}.max_magnitude()), 1.75);
  EXPECT_EQ((FixedPointFormat{16, 15}.resolution()), std::ldexp(1.0, -15));
}

TEST(QuantizeModel, ResolutionIdempotenceAndZero) {
  Rng rng(3);
  Mlp m = testing::random_mlp({6, 5, 3}, rng, 0.999);
  const FixedPointFormat fmt{16, 15};
  const Mlp q = quantize_model(m, fmt);
  for (std::size_t h = 0; h < m.n_layers(); ++h) {
    EXPECT_LT((q.layer(h).weights - m.layer(h).weights).cwiseAbs().maxCoeff(), std::ldexp(1.0, -15));
  }
  const Mlp qq = quantize_model(q, fmt);
  for (std::size_t h = 0; h < m.n_layers(); ++h) EXPECT_EQ(qq.layer(h).weights, q.layer(h).weights);

  for (std::size_t h = 0; h < m.n_layers(); ++h) {
    m.layer(h).weights.setZero();
    m.layer(h).biases.setZero();
  }
  const Mlp z = quantize_model(m, {4, 3});
  for (std::size_t h = 0; h < m.n_layers(); ++h) EXPECT_TRUE(z.layer(h).weights.isZero());
}

TEST(QuantizeModel, FinerFormatsNeverErrMore) {
  Rng rng(4);
  const Mlp m = testing::random_mlp({5, 4, 3}, rng, 0.9);
  const int f16 = frac_bits_candidates(16).back(), f4 = frac_bits_candidates(4).back();
  const Mlp q16 = quantize_model(m, {16, f16}), q4 = quantize_model(m, {4, f4});
  for (std::size_t h = 0; h < m.n_layers(); ++h) {
    const Matrix e16 = (q16.layer(h).weights - m.layer(h).weights).cwiseAbs();
    const Matrix e4 = (q4.layer(h).weights - m.layer(h).weights).cwiseAbs();
    EXPECT_TRUE((e16.array() <= e4.array()).all());
  }
}

TEST(FracBits, Candidates) {
  std::vector<int> sixteen;
  for (int f = 3; f <= 15; ++f) sixteen.push_back(f);
  EXPECT_EQ(frac_bits_candidates(16), sixteen);
  EXPECT_EQ(frac_bits_candidates(4), std::vector<int>{3});
  EXPECT_EQ(frac_bits_candidates(2), (std::vector<int>{0, 1}));
  EXPECT_THROW(frac_bits_candidates(1), Error);
}

TEST(FracBits, SearchCountsAndTieBreak) {
  Rng rng(5);
  const Mlp m = testing::random_mlp({3, 2}, rng, 0.4);
  const Dataset d = testing::random_dataset(20, 3, 2, rng);
  const FracBitsChoice c16 = search_frac_bits(m, d, 16, 0.01);
  EXPECT_EQ(c16.evaluations, 13u);
  EXPECT_EQ(c16.frac_bits, 15);  // every fine format reproduces the predictions; ties go to larger F
  EXPECT_TRUE(c16.within_tolerance);
  const FracBitsChoice c2 = search_frac_bits(m, d, 2, 0.01);
  EXPECT_EQ(c2.evaluations, 2u);
  EXPECT_TRUE(c2.fallback_range);
}

TEST(Margin, Values) {
  const std::vector<double> w4 = {2.0, 0.0}, w2 = {1.0, -1.0}, zero = {0.0};
  EXPECT_EQ(margin(w4), 0.5);
  EXPECT_EQ(margin(w2), 1.0);
  EXPECT_THROW(margin(zero), Error);
}

TEST(Theorem1, ConditionAndIdentity) {
  const auto a = AugmentedClassifier::from_vectors(Vector{{0.8, -0.6}}, Vector{{0.75, -0.5}});
  RowMatrix x(1, 1);
  x << 1.0;
  const std::vector<int> y = {1};
  EXPECT_TRUE(theorem1_check(a, x, y, 1.0).condition_holds);

  const auto same = AugmentedClassifier::from_vectors(Vector{{0.8, -0.6}}, Vector{{0.8, -0.6}});
  RowMatrix xs = RowMatrix::Random(5, 1);
  const std::vector<int> ys = {1, -1, 1, -1, 1};
  const auto r = theorem1_check(same, xs, ys, 0.5);
  EXPECT_TRUE(r.condition_holds);
  EXPECT_EQ(r.gamma, r.gamma_q);
  EXPECT_TRUE(r.label_preserved);

  const auto flipped = AugmentedClassifier::from_vectors(Vector{{0.8, -0.6}}, Vector{{-0.5, -0.5}});
  EXPECT_FALSE(theorem1_check(flipped, x, y, 1.0).condition_holds);
  EXPECT_THROW(AugmentedClassifier::from_vectors(Vector::Zero(2), Vector::Zero(3)), DimensionError);
  EXPECT_THROW(theorem1_check(a, RowMatrix::Zero(1, 3), y, 1.0), DimensionError);
}

TEST(Theorem1, BoundHoldsWhenPremisesHold) {
  Rng rng(6);
  std::size_t with_premises = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(6));
    Layer l;
    l.weights.resize(1, n);
    for (Eigen::Index j = 0; j < n; ++j) l.weights(0, j) = rng.uniform(-2, 2);
    l.biases = Vector::Constant(1, rng.uniform(-1, 1));
    const int t = 2 + static_cast<int>(rng.below(15));
    const FixedPointFormat fmt{t, static_cast<int>(rng.below(static_cast<std::uint64_t>(t)))};
    const auto a = AugmentedClassifier::from_layer_row(l, 0, fmt);
    RowMatrix x(8, n);
    std::vector<int> y(8);
    for (Eigen::Index i = 0; i < 8; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) x(i, j) = rng.uniform(-1, 1);
      // Labels from the full-precision classifier so it is consistent.
      y[static_cast<std::size_t>(i)] = (x.row(i) * a.u.head(n))(0) + a.u(n) >= 0 ? 1 : -1;
    }
    const auto r = theorem1_check(a, x, y, 1.0);
    EXPECT_TRUE(r.condition_holds);
    if (r.premises_hold()) {
      ++with_premises;
      EXPECT_LE(r.gamma_q, r.gamma);
    }
  }
  EXPECT_GT(with_premises, 0u);
}

TEST(Theorem1, UnconditionalBoundCanFail) {
  // Shrinking one coordinate can undo a cancellation: u.x = 1, u_q.x = 6.
  const auto a = AugmentedClassifier::from_vectors(Vector{{1.0, 1.0, 0.0}}, Vector{{1.0, 0.5, 0.0}});
  RowMatrix x(1, 2);
  x << 11.0, -10.0;
  const std::vector<int> y = {1};
  const auto r = theorem1_check(a, x, y, 1.0);
  EXPECT_TRUE(r.condition_holds);
  EXPECT_FALSE(r.label_preserved);
  EXPECT_GT(r.gamma_q, r.gamma);
}

TEST(BitsSweep, RowsAndCsv) {
  Rng rng(7);
  const Mlp m = testing::random_mlp({4, 5, 3}, rng, 0.8);
  const Dataset d = testing::random_dataset(30, 4, 3, rng);
  QuantSweepConfig cfg;
  cfg.loss_spec = {1e-3, 0, 0, Scope::none};
  const QuantReport r = bits_sweep(m, d, d, cfg);
  ASSERT_EQ(r.rows.size(), 15u);
  EXPECT_EQ(r.rows.front().total_bits, 16);
  EXPECT_EQ(r.rows.back().total_bits, 2);
  EXPECT_EQ(r.full_precision.total_bits, 0);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.condition_holds);
    EXPECT_EQ(row.gamma, r.full_precision.gamma);
  }
  EXPECT_NEAR(r.rows.front().accuracy, r.full_precision.accuracy, 0.05);
  std::ostringstream out;
  write_quant_csv(out, r);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("T,F,acc,margin,loss,gamma,gamma_q,cond", 0), 0u);
  EXPECT_NE(s.find("\ninf,"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 17);
}

TEST(BitsSweep, QuantizedCompressionRatio) {
  EXPECT_DOUBLE_EQ(quantized_compression_ratio(100, 20, 8), 5.0 * 32.0 / 8.0);
}

}  // namespace
}  // namespace lcnn
