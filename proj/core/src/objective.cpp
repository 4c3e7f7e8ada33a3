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

#include "lcnn/objective.hpp"

#include <cmath>
#include <string>

namespace lcnn {

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::none: return "none";
    case Scope::last_layer: return "last_layer";
    case Scope::all_layers: return "all_layers";
  }
  return "none";
}

Scope parse_scope(std::string_view s) {
  if (s == "none") return Scope::none;
  if (s == "last_layer" || s == "LCL") return Scope::last_layer;
  if (s == "all_layers" || s == "LCA") return Scope::all_layers;
  throw Error("unknown regularizer scope '" + std::string(s) + "'");
}

void RegularizerSpec::validate() const {
  for (double v : {C, D, l1}) {
    if (!std::isfinite(v) || v < 0.0) throw Error("regularizer coefficients must be finite and >= 0");
  }
}

double multiclass_hinge(std::span<const double> scores, std::size_t label) {
  if (label >= scores.size()) throw DimensionError("label outside score vector");
  const double target = scores[label];
  double loss = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j != label) loss += std::max(0.0, 1.0 - target + scores[j]);
  }
  return loss;
}

double data_dependent_penalty(const ForwardTrace& trace, const RegularizerSpec& spec) {
  if (spec.scope == Scope::none) return 0.0;
  double sq = trace.scores.squaredNorm();
  if (spec.scope == Scope::all_layers) {
    for (const auto& a : trace.pre_activations) sq += a.squaredNorm();
  }
  return 0.5 * spec.D * sq;
}

WeightPenalties weight_penalties(const Mlp& model, const RegularizerSpec& spec) {
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t i = 0; i < model.n_layers(); ++i) {
    sq += model.layer(i).weights.squaredNorm();
    abs += model.layer(i).weights.cwiseAbs().sum();
  }
  return {0.5 * spec.C * sq, spec.l1 * abs};
}

namespace {

// Hinge value and its score subgradient (indicator form) over a batch.
double hinge_batch(const Matrix& s, const std::vector<int>& labels, Matrix* grad) {
  double loss = 0.0;
  if (grad) grad->setZero(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    const double target = s(i, y);
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (j == y) continue;
      const double margin = 1.0 - target + s(i, j);
      if (margin > 0.0) {
        loss += margin;
        if (grad) {
          (*grad)(i, j) += 1.0;
          (*grad)(i, y) -= 1.0;
        }
      }
    }
  }
  return loss;
}

double pre_activation_energy(const BatchTrace& t, Scope scope) {
  if (scope == Scope::none) return 0.0;
  double sq = t.scores.squaredNorm();
  if (scope == Scope::all_layers) {
    for (const auto& a : t.pre_activations) sq += a.squaredNorm();
  }
  return sq;
}

void check_batch(const Mlp& model, const Dataset& batch) {
  if (batch.empty()) throw Error("objective of an empty batch");
  for (int y : batch.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.n_classes()) {
      throw DimensionError("label " + std::to_string(y) + " outside model classes");
    }
  }
}

LossBreakdown assemble(double hinge, double energy, const WeightPenalties& w, const RegularizerSpec& spec,
                       double sample_scale) {
  LossBreakdown b;
  b.hinge = sample_scale * hinge;
  b.data_dep_term = sample_scale * 0.5 * spec.effective_D() * energy;
  b.l2_term = w.l2;
  b.l1_term = w.l1;
  b.total = b.hinge + b.l2_term + b.l1_term + b.data_dep_term;
  return b;
}

}  // namespace

LossBreakdown full_objective(const Mlp& model, const Dataset& batch, const RegularizerSpec& spec,
                             double sample_scale) {
  check_batch(model, batch);
  const BatchTrace t = forward_batch(model, batch.features);
  const double hinge = hinge_batch(t.scores, batch.labels, nullptr);
  return assemble(hinge, pre_activation_energy(t, spec.scope), weight_penalties(model, spec), spec, sample_scale);
}

GradientResult gradients(const Mlp& model, const Dataset& batch, const RegularizerSpec& spec,
                         double sample_scale) {
  check_batch(model, batch);
  const BatchTrace t = forward_batch(model, batch.features);
  const double d = spec.effective_D();

  Matrix d_scores;
  const double hinge = hinge_batch(t.scores, batch.labels, &d_scores);
  d_scores *= sample_scale;
  if (spec.scope != Scope::none) d_scores += (sample_scale * d) * t.scores;

  GradientResult out;
  out.loss = assemble(hinge, pre_activation_energy(t, spec.scope), weight_penalties(model, spec), spec, sample_scale);

  const std::size_t n_layers = model.n_layers();
  out.grads.weights.resize(n_layers);
  out.grads.biases.resize(n_layers);

  // Walk backwards: `delta` holds d objective / d pre-activation of layer i.
  Matrix delta = std::move(d_scores);
  for (std::size_t k = n_layers; k-- > 0;) {
    const Layer& l = model.layer(k);
    if (k == 0) {
      out.grads.weights[k] = delta.transpose() * batch.features;
    } else {
      out.grads.weights[k] = delta.transpose() * t.activations[k - 1];
    }
    out.grads.biases[k] = delta.colwise().sum().transpose();
    if (k == 0) break;
    Matrix d_act = delta * l.weights;
    const Matrix& a = t.pre_activations[k - 1];
    delta = (a.array() > 0.0).select(d_act, 0.0);
    if (spec.scope == Scope::all_layers) delta += (sample_scale * d) * a;
  }

  for (std::size_t k = 0; k < n_layers; ++k) {
    const Layer& l = model.layer(k);
    Matrix& g = out.grads.weights[k];
    if (spec.C != 0.0) g += spec.C * l.weights;
    if (spec.l1 != 0.0) g += spec.l1 * l.weights.unaryExpr([](double w) { return double((w > 0.0) - (w < 0.0)); });
    if (l.has_mask()) g = l.mask.select(g, 0.0);
  }
  return out;
}

double vc_gamma(std::span<const double> w, double b, const Eigen::Ref<const RowMatrix>& x, double C) {
  if (w.size() != static_cast<std::size_t>(x.cols())) {
    throw DimensionError("weight length " + std::to_string(w.size()) + " != feature count " +
                         std::to_string(x.cols()));
  }
  const Eigen::Map<const Vector> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  const Vector proj = (x * wv).array() + b;
  return proj.squaredNorm() + C * wv.squaredNorm();
}

double vc_gamma(std::span<const double> w, double b, const Dataset& data, double C) {
  return vc_gamma(w, b, data.features, C);
}

double vc_gamma(const Layer& layer, const Eigen::Ref<const RowMatrix>& inputs, double C) {
  if (layer.inputs() != static_cast<std::size_t>(inputs.cols())) {
    throw DimensionError("layer input width does not match data");
  }
  Matrix proj = inputs * layer.weights.transpose();
  proj.rowwise() += layer.biases.transpose();
  return proj.squaredNorm() + C * layer.weights.squaredNorm();
}

RowMatrix classifier_inputs(const Mlp& model, const Eigen::Ref<const RowMatrix>& x) {
  if (model.hidden.empty()) return x;
  const BatchTrace t = forward_batch(model, x);
  return t.activations.back();
}

}  // namespace lcnn
