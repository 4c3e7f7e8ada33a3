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
#include "lcnn/types.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace lcnn {

/// Where the data-dependent pre-activation penalty applies.
enum class Scope {
  none,        // not applied
  last_layer,  // classifier scores only (LCL)
  all_layers,  // classifier scores and every hidden pre-activation (LCA)
};

std::string_view to_string(Scope s);
Scope parse_scope(std::string_view s);

/// Coefficients of the training objective. `C` weighs (C/2)||w||^2 over all
/// weight matrices, `l1` weighs l1*||w||_1, `D` weighs (D/2) * sum of squared
/// pre-activations over the samples. Biases are never weight-penalized.
struct RegularizerSpec {
  double C = 0.0;
  double D = 0.0;
  double l1 = 0.0;
  Scope scope = Scope::none;

  void validate() const;
  double effective_D() const { return scope == Scope::none ? 0.0 : D; }
};

struct LossBreakdown {
  double hinge = 0.0;
  double l2_term = 0.0;
  double l1_term = 0.0;
  double data_dep_term = 0.0;
  double total = 0.0;
};

/// sum_{j != label} max(0, 1 - s_label + s_j)
double multiclass_hinge(std::span<const double> scores, std::size_t label);

/// (D/2) * sum of squared scores, plus hidden pre-activations for all_layers.
double data_dependent_penalty(const ForwardTrace& trace, const RegularizerSpec& spec);

struct WeightPenalties {
  double l2 = 0.0;
  double l1 = 0.0;
};
WeightPenalties weight_penalties(const Mlp& model, const RegularizerSpec& spec);

/// Training objective on `batch`. The per-sample terms (hinge and
/// data-dependent) are summed and multiplied by `sample_scale`; the weight
/// penalties are added once. sample_scale = 1 gives the plain sum form.
LossBreakdown full_objective(const Mlp& model, const Dataset& batch, const RegularizerSpec& spec,
                             double sample_scale = 1.0);

/// Per-layer gradients, hidden layers first and the classifier last.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

struct GradientResult {
  Gradients grads;
  LossBreakdown loss;
};

/// Subgradient of full_objective (same sample_scale). Kinks of the hinge,
/// the ReLU and |w| all take subgradient 0. Pruned weights get 0.
GradientResult gradients(const Mlp& model, const Dataset& batch, const RegularizerSpec& spec,
                         double sample_scale = 1.0);

/// Gamma = sum_i (w.x_i + b)^2 + C ||w||^2 for one hyperplane.
double vc_gamma(std::span<const double> w, double b, const Eigen::Ref<const RowMatrix>& x, double C);
double vc_gamma(std::span<const double> w, double b, const Dataset& data, double C);
/// Multiclass form: Gamma summed over the rows of `layer` applied to `inputs`.
double vc_gamma(const Layer& layer, const Eigen::Ref<const RowMatrix>& inputs, double C);

/// Inputs seen by the classifier (last hidden activations, or the raw
/// features for a linear model), one row per sample.
RowMatrix classifier_inputs(const Mlp& model, const Eigen::Ref<const RowMatrix>& x);

}  // namespace lcnn
