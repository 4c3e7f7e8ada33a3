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
#include "lcnn/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lcnn {

/// Affine layer: `weights` is out x in, one row per unit.
///
/// `mask` is either empty (dense layer) or has the shape of `weights`;
/// masked-out entries are pruned and stay zero through any later update.
struct Layer {
  Matrix weights;
  Vector biases;
  Mask mask;

  std::size_t inputs() const { return static_cast<std::size_t>(weights.cols()); }
  std::size_t outputs() const { return static_cast<std::size_t>(weights.rows()); }
  bool has_mask() const { return mask.size() != 0; }
  std::size_t nonzero_weights() const;
  /// Zeroes weights outside the mask; no-op for dense layers.
  void apply_mask();
};

/// Feedforward net: ReLU hidden layers followed by a linear classifier
/// with one output row per class. No hidden layers means a linear model.
struct Mlp {
  std::vector<Layer> hidden;
  Layer classifier;

  std::size_t input_width() const;
  std::size_t n_classes() const { return classifier.outputs(); }
  std::size_t depth() const { return hidden.size(); }
  std::size_t n_layers() const { return hidden.size() + 1; }
  /// Layer `i` counting hidden layers first, classifier last.
  const Layer& layer(std::size_t i) const { return i < hidden.size() ? hidden[i] : classifier; }
  Layer& layer(std::size_t i) { return i < hidden.size() ? hidden[i] : classifier; }

  /// Widths [n_inputs, hidden..., K].
  std::vector<std::size_t> widths() const;
  std::size_t nonzero_weights() const;
  std::size_t total_weights() const;

  /// Throws on inconsistent shapes or non-finite parameters.
  void validate() const;
};

/// Per-sample intermediate values of a forward pass.
struct ForwardTrace {
  std::vector<Vector> pre_activations;  // a_h per hidden layer
  std::vector<Vector> activations;      // z_h = max(0, a_h)
  Vector scores;                        // classifier outputs
};

/// Same as ForwardTrace for a batch; row i belongs to sample i.
struct BatchTrace {
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> activations;
  Matrix scores;
};

/// widths = [n_features, hidden..., K]. Weights ~ U[-s, s] with
/// s = sqrt(6 / (fan_in + fan_out)), biases zero.
Mlp init_mlp(std::span<const std::size_t> widths, std::uint64_t seed);

ForwardTrace forward(const Mlp& model, const Eigen::Ref<const Vector>& x);
BatchTrace forward_batch(const Mlp& model, const Eigen::Ref<const RowMatrix>& x);
/// Classifier scores only, one row per sample.
Matrix scores(const Mlp& model, const Eigen::Ref<const RowMatrix>& x);

/// argmax with ties resolved to the lowest class index.
int predict_class(const Eigen::Ref<const Vector>& scores);
std::vector<int> predict(const Mlp& model, const Dataset& data);

/// Fraction of samples whose predicted class equals the label.
double accuracy(const Mlp& model, const Dataset& data);

}  // namespace lcnn
