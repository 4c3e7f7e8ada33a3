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

#pragma once

#include "lcnn/dataset.hpp"
#include "lcnn/network.hpp"
#include "lcnn/objective.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lcnn {

enum class Rounding {
  toward_zero,  // magnitude truncation; never grows |x|
  nearest,      // round half away from zero; may grow |x|
};

std::string_view to_string(Rounding r);
Rounding parse_rounding(std::string_view s);

/// Sign-magnitude fixed point: one sign bit, T-1 magnitude bits of which F
/// are fractional. Representable values are +-m * 2^-F, 0 <= m <= 2^(T-1) - 1.
struct FixedPointFormat {
  int total_bits = 16;
  int frac_bits = 8;
  Rounding rounding = Rounding::toward_zero;

  void validate() const;
  double resolution() const;
  double max_magnitude() const;
  long long max_code() const { return (1LL << (total_bits - 1)) - 1; }
};

/// Maps x onto the format grid and saturates at +-max_magnitude().
/// NaN maps to 0; infinities saturate.
double quantize_value(double x, const FixedPointFormat& fmt);

/// Quantizes every weight and bias. Zeros (and pruning masks) are preserved.
Mlp quantize_model(const Mlp& model, const FixedPointFormat& fmt);

/// Fraction-bit candidates for T total bits: [3, 15] clamped to [0, T-1];
/// when that is empty (T < 4) the full range [0, T-1].
std::vector<int> frac_bits_candidates(int total_bits);

struct FracBitsChoice {
  int frac_bits = 0;
  double accuracy = 0.0;
  double reference_accuracy = 0.0;
  /// accuracy >= reference_accuracy - tolerance
  bool within_tolerance = false;
  /// The preferred [3, 15] range was empty and [0, T-1] was searched.
  bool fallback_range = false;
  std::size_t evaluations = 0;
};

/// Tries every candidate F on `eval` and keeps the most accurate one
/// (ties go to the larger F).
FracBitsChoice search_frac_bits(const Mlp& model, const Dataset& eval, int total_bits, double tolerance,
                                Rounding rounding = Rounding::toward_zero);

/// 2 / ||w||^2 over the given weights. Throws on a zero vector.
double margin(std::span<const double> weights);
/// Margin of a model's classifier layer (weights only, no biases).
double margin(const Mlp& model);

/// Hyperplane with the bias appended, u = [w; b], and its quantized copy.
struct AugmentedClassifier {
  Vector u;
  Vector u_q;

  static AugmentedClassifier from_layer_row(const Layer& layer, std::size_t row, const FixedPointFormat& fmt);
  static AugmentedClassifier from_vectors(Vector u, Vector u_q);
};

struct Theorem1Result {
  /// |u_q_j| <= |u_j| and u_q_j is 0 or has the sign of u_j, for every j.
  bool condition_holds = false;
  /// y_i * sum_j (u_j - u_q_j) x_ij >= 0 for every sample.
  bool label_preserved = false;
  /// Both classifiers give every sample a score of the label's sign (or 0).
  bool both_consistent = false;
  double gamma = 0.0;
  double gamma_q = 0.0;
  /// Conditions under which gamma_q <= gamma is guaranteed.
  bool premises_hold() const { return condition_holds && label_preserved && both_consistent; }
};

/// Compares the bound sum_i (u.x_i)^2 + C||u||^2 for u and u_q on samples
/// augmented with a constant 1. `x` holds the raw n features (n = |u| - 1),
/// `targets` the +-1 labels.
Theorem1Result theorem1_check(const AugmentedClassifier& u, const Eigen::Ref<const RowMatrix>& x,
                              std::span<const int> targets, double C);
/// One-vs-rest form: samples of `positive_class` are +1, the rest -1.
Theorem1Result theorem1_check(const AugmentedClassifier& u, const Dataset& data, double C, int positive_class = 1);

struct QuantSweepConfig {
  double tolerance = 0.01;
  Rounding rounding = Rounding::toward_zero;
  int max_bits = 16;
  int min_bits = 2;
  /// C used in both Gamma and Gamma^Q.
  double gamma_c = 1.0;
  /// Objective reported in the loss column (per-sample mean form).
  RegularizerSpec loss_spec;
};

struct QuantRow {
  int total_bits = 0;  // 0 for the full-precision baseline
  int frac_bits = 0;
  double accuracy = 0.0;            // on the report set
  double selection_accuracy = 0.0;  // on the set F was chosen with
  double margin = 0.0;
  double loss = 0.0;
  double gamma = 0.0;
  double gamma_q = 0.0;
  bool condition_holds = true;
  bool within_tolerance = true;
  bool fallback_range = false;
};

struct QuantReport {
  QuantRow full_precision;
  std::vector<QuantRow> rows;  // T = max_bits down to min_bits

  /// Smallest T whose selection accuracy stays within tolerance.
  std::optional<QuantRow> smallest_within_tolerance() const;
};

/// For T from max_bits down to min_bits: pick F on `select`, then report
/// accuracy, margin, loss and Gamma/Gamma^Q of the classifier on `report`.
QuantReport bits_sweep(const Mlp& model, const Dataset& select, const Dataset& report,
                       const QuantSweepConfig& config = {});

/// CSV: T,F,acc,margin,loss,gamma,gamma_q,cond (T=inf row first).
void write_quant_csv(std::ostream& out, const QuantReport& report);

/// (32 * nonzeros_before) / (T * nonzeros_after): storage ratio against
/// dense 32-bit floats. Not a measure from the source experiments.
double quantized_compression_ratio(std::size_t nonzeros_before, std::size_t nonzeros_after, int total_bits);

}  // namespace lcnn
