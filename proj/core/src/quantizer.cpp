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

#include "lcnn/csv.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace lcnn {

std::string_view to_string(Rounding r) { return r == Rounding::nearest ? "nearest" : "toward_zero"; }

Rounding parse_rounding(std::string_view s) {
  if (s == "toward_zero") return Rounding::toward_zero;
  if (s == "nearest") return Rounding::nearest;
  throw Error("unknown rounding '" + std::string(s) + "'");
}

void FixedPointFormat::validate() const {
  if (total_bits < 2 || total_bits > 16) throw Error("total bits must lie in [2, 16]");
  if (frac_bits < 0 || frac_bits > total_bits - 1) throw Error("fraction bits must lie in [0, T-1]");
}

double FixedPointFormat::resolution() const { return std::ldexp(1.0, -frac_bits); }

double FixedPointFormat::max_magnitude() const { return std::ldexp(static_cast<double>(max_code()), -frac_bits); }

double quantize_value(double x, const FixedPointFormat& fmt) {
  if (std::isnan(x) || x == 0.0) return 0.0;
  const double scaled = std::ldexp(std::abs(x), fmt.frac_bits);  // exact
  const auto cap = static_cast<double>(fmt.max_code());
  double code = fmt.rounding == Rounding::nearest ? std::round(scaled) : std::floor(scaled);
  if (!(code <= cap)) code = cap;
  return std::copysign(std::ldexp(code, -fmt.frac_bits), x) + 0.0;
}

Mlp quantize_model(const Mlp& model, const FixedPointFormat& fmt) {
  fmt.validate();
  Mlp out = model;
  auto q = [&fmt](double v) { return quantize_value(v, fmt); };
  for (std::size_t k = 0; k < out.n_layers(); ++k) {
    Layer& l = out.layer(k);
    l.weights = l.weights.unaryExpr(q);
    l.biases = l.biases.unaryExpr(q);
    l.apply_mask();
  }
  return out;
}

std::vector<int> frac_bits_candidates(int total_bits) {
  if (total_bits < 2 || total_bits > 16) throw Error("total bits must lie in [2, 16]");
  const int hi = std::min(15, total_bits - 1);
  int lo = 3;
  if (lo > hi) lo = 0;
  std::vector<int> out;
  for (int f = lo; f <= hi; ++f) out.push_back(f);
  return out;
}

FracBitsChoice search_frac_bits(const Mlp& model, const Dataset& eval, int total_bits, double tolerance,
                                Rounding rounding) {
  const auto candidates = frac_bits_candidates(total_bits);
  FracBitsChoice best;
  best.reference_accuracy = accuracy(model, eval);
  best.fallback_range = candidates.front() == 0;
  best.accuracy = -1.0;
  for (int f : candidates) {
    const double acc = accuracy(quantize_model(model, {total_bits, f, rounding}), eval);
    ++best.evaluations;
    if (acc >= best.accuracy) {
      best.accuracy = acc;
      best.frac_bits = f;
    }
  }
  best.within_tolerance = best.accuracy >= best.reference_accuracy - tolerance - 1e-12;
  return best;
}

double margin(std::span<const double> weights) {
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  if (sq == 0.0) throw Error("margin undefined for zero weights");
  return 2.0 / sq;
}

double margin(const Mlp& model) {
  const Matrix& w = model.classifier.weights;
  return margin(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

AugmentedClassifier AugmentedClassifier::from_layer_row(const Layer& layer, std::size_t row,
                                                        const FixedPointFormat& fmt) {
  if (row >= layer.outputs()) throw DimensionError("row outside layer");
  const auto n = static_cast<Eigen::Index>(layer.inputs());
  AugmentedClassifier a;
  a.u.resize(n + 1);
  a.u.head(n) = layer.weights.row(static_cast<Eigen::Index>(row)).transpose();
  a.u(n) = layer.biases(static_cast<Eigen::Index>(row));
  a.u_q = a.u.unaryExpr([&fmt](double v) { return quantize_value(v, fmt); });
  return a;
}

AugmentedClassifier AugmentedClassifier::from_vectors(Vector u, Vector u_q) {
  if (u.size() != u_q.size()) throw DimensionError("u and u_q differ in length");
  return {std::move(u), std::move(u_q)};
}

Theorem1Result theorem1_check(const AugmentedClassifier& a, const Eigen::Ref<const RowMatrix>& x,
                              std::span<const int> targets, double C) {
  const Eigen::Index n1 = a.u.size();
  if (a.u_q.size() != n1) throw DimensionError("u and u_q differ in length");
  if (x.cols() + 1 != n1) {
    throw DimensionError("classifier has " + std::to_string(n1) + " coordinates, samples have " +
                         std::to_string(x.cols()) + " features plus the constant");
  }
  if (targets.size() != static_cast<std::size_t>(x.rows())) throw DimensionError("one target per sample required");

  Theorem1Result r;
  r.condition_holds = true;
  for (Eigen::Index j = 0; j < n1; ++j) {
    const double u = a.u(j);
    const double q = a.u_q(j);
    const bool shrinks = std::abs(q) <= std::abs(u);
    const bool same_sign = q == 0.0 || (q > 0.0) == (u > 0.0);
    if (!shrinks || !same_sign) r.condition_holds = false;
  }

  const auto n = x.cols();
  const Vector s = (x * a.u.head(n)).array() + a.u(n);
  const Vector s_q = (x * a.u_q.head(n)).array() + a.u_q(n);
  r.label_preserved = true;
  r.both_consistent = true;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double y = targets[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0;
    if (y * (s(i) - s_q(i)) < 0.0) r.label_preserved = false;
    if (y * s(i) < 0.0 || y * s_q(i) < 0.0) r.both_consistent = false;
  }
  r.gamma = s.squaredNorm() + C * a.u.squaredNorm();
  r.gamma_q = s_q.squaredNorm() + C * a.u_q.squaredNorm();
  return r;
}

Theorem1Result theorem1_check(const AugmentedClassifier& u, const Dataset& data, double C, int positive_class) {
  std::vector<int> targets(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) targets[i] = data.labels[i] == positive_class ? 1 : -1;
  return theorem1_check(u, data.features, targets, C);
}

namespace {

QuantRow evaluate_row(const Mlp& full, const Mlp& quantized, const Dataset& report, const RowMatrix& cls_inputs,
                      const QuantSweepConfig& config) {
  QuantRow row;
  row.accuracy = accuracy(quantized, report);
  try {
    row.margin = margin(quantized);
  } catch (const Error&) {
    row.margin = std::numeric_limits<double>::infinity();
  }
  row.loss = full_objective(quantized, report, config.loss_spec, 1.0 / static_cast<double>(report.size())).total;
  row.gamma = vc_gamma(full.classifier, cls_inputs, config.gamma_c);
  row.gamma_q = vc_gamma(quantized.classifier, cls_inputs, config.gamma_c);
  for (std::size_t r = 0; r < full.classifier.outputs(); ++r) {
    const auto n = static_cast<Eigen::Index>(full.classifier.inputs());
    const auto ri = static_cast<Eigen::Index>(r);
    for (Eigen::Index j = 0; j <= n; ++j) {
      const double u = j < n ? full.classifier.weights(ri, j) : full.classifier.biases(ri);
      const double q = j < n ? quantized.classifier.weights(ri, j) : quantized.classifier.biases(ri);
      if (std::abs(q) > std::abs(u) || (q != 0.0 && (q > 0.0) != (u > 0.0))) row.condition_holds = false;
    }
  }
  return row;
}

}  // namespace

std::optional<QuantRow> QuantReport::smallest_within_tolerance() const {
  std::optional<QuantRow> best;
  for (const auto& r : rows) {
    if (r.within_tolerance && (!best || r.total_bits < best->total_bits)) best = r;
  }
  return best;
}

QuantReport bits_sweep(const Mlp& model, const Dataset& select, const Dataset& report,
                       const QuantSweepConfig& config) {
  if (config.min_bits < 2 || config.max_bits > 16 || config.min_bits > config.max_bits) {
    throw Error("bit range must satisfy 2 <= min_bits <= max_bits <= 16");
  }
  const RowMatrix cls_inputs = classifier_inputs(model, report.features);

  QuantReport out;
  out.full_precision = evaluate_row(model, model, report, cls_inputs, config);
  out.full_precision.selection_accuracy = accuracy(model, select);

  for (int t = config.max_bits; t >= config.min_bits; --t) {
    const FracBitsChoice choice = search_frac_bits(model, select, t, config.tolerance, config.rounding);
    const Mlp q = quantize_model(model, {t, choice.frac_bits, config.rounding});
    QuantRow row = evaluate_row(model, q, report, cls_inputs, config);
    row.total_bits = t;
    row.frac_bits = choice.frac_bits;
    row.selection_accuracy = choice.accuracy;
    row.within_tolerance = choice.within_tolerance;
    row.fallback_range = choice.fallback_range;
    out.rows.push_back(row);
  }
  return out;
}

void write_quant_csv(std::ostream& out, const QuantReport& report) {
  CsvWriter csv(out);
  csv.row({"T", "F", "acc", "margin", "loss", "gamma", "gamma_q", "cond"});
  auto emit = [&](const QuantRow& r, bool baseline) {
    csv.row({baseline ? std::string("inf") : std::to_string(r.total_bits),
             baseline ? std::string() : std::to_string(r.frac_bits), format_number(r.accuracy),
             format_number(r.margin), format_number(r.loss), format_number(r.gamma), format_number(r.gamma_q),
             r.condition_holds ? "1" : "0"});
  };
  emit(report.full_precision, true);
  for (const auto& r : report.rows) emit(r, false);
}

double quantized_compression_ratio(std::size_t nonzeros_before, std::size_t nonzeros_after, int total_bits) {
  if (nonzeros_after == 0 || total_bits <= 0) return static_cast<double>(nonzeros_before);
  return (32.0 * static_cast<double>(nonzeros_before)) /
         (static_cast<double>(total_bits) * static_cast<double>(nonzeros_after));
}

}  // namespace lcnn
