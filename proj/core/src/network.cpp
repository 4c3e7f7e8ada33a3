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

#include "lcnn/network.hpp"

#include "lcnn/random.hpp"

#include <cmath>
#include <string>

namespace lcnn {

namespace {

void check_input(const Mlp& model, Eigen::Index cols) {
  if (static_cast<std::size_t>(cols) != model.input_width()) {
    throw DimensionError("input has " + std::to_string(cols) + " features, model expects " +
                         std::to_string(model.input_width()));
  }
}

}  // namespace

std::size_t Layer::nonzero_weights() const {
  return static_cast<std::size_t>((weights.array() != 0.0).count());
}

void Layer::apply_mask() {
  if (has_mask()) weights = mask.select(weights, 0.0);
}

std::size_t Mlp::input_width() const {
  return hidden.empty() ? classifier.inputs() : hidden.front().inputs();
}

std::vector<std::size_t> Mlp::widths() const {
  std::vector<std::size_t> w{input_width()};
  for (const auto& h : hidden) w.push_back(h.outputs());
  w.push_back(classifier.outputs());
  return w;
}

std::size_t Mlp::nonzero_weights() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_layers(); ++i) n += layer(i).nonzero_weights();
  return n;
}

std::size_t Mlp::total_weights() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_layers(); ++i) n += static_cast<std::size_t>(layer(i).weights.size());
  return n;
}

void Mlp::validate() const {
  std::size_t width = input_width();
  for (std::size_t i = 0; i < n_layers(); ++i) {
    const Layer& l = layer(i);
    const std::string where = "layer " + std::to_string(i);
    if (l.inputs() != width) {
      throw DimensionError(where + " expects " + std::to_string(l.inputs()) + " inputs, previous layer gives " +
                           std::to_string(width));
    }
    if (static_cast<std::size_t>(l.biases.size()) != l.outputs()) {
      throw DimensionError(where + " bias length does not match its output width");
    }
    if (l.has_mask() && (l.mask.rows() != l.weights.rows() || l.mask.cols() != l.weights.cols())) {
      throw DimensionError(where + " mask shape does not match its weights");
    }
    if (!l.weights.allFinite() || !l.biases.allFinite()) {
      throw Error(where + " has non-finite parameters");
    }
    width = l.outputs();
  }
  if (classifier.outputs() == 0) throw DimensionError("classifier has no outputs");
}

Mlp init_mlp(std::span<const std::size_t> widths, std::uint64_t seed) {
  if (widths.size() < 2) throw Error("need at least input and output widths");
  for (auto w : widths) {
    if (w == 0) throw Error("layer widths must be positive");
  }
  Rng rng(seed);
  auto make = [&](std::size_t fan_in, std::size_t fan_out) {
    Layer l;
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    l.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    // Fill row by row so the draw order matches the row-major file layout.
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = rng.uniform(-s, s);
    }
    l.biases = Vector::Zero(static_cast<Eigen::Index>(fan_out));
    return l;
  };
  Mlp m;
  for (std::size_t i = 1; i + 1 < widths.size(); ++i) m.hidden.push_back(make(widths[i - 1], widths[i]));
  m.classifier = make(widths[widths.size() - 2], widths.back());
  return m;
}

ForwardTrace forward(const Mlp& model, const Eigen::Ref<const Vector>& x) {
  check_input(model, x.size());
  ForwardTrace t;
  Vector z = x;
  for (const auto& h : model.hidden) {
    Vector a = h.weights * z + h.biases;
    z = a.cwiseMax(0.0);
    t.pre_activations.push_back(std::move(a));
    t.activations.push_back(z);
  }
  t.scores = model.classifier.weights * z + model.classifier.biases;
  return t;
}

BatchTrace forward_batch(const Mlp& model, const Eigen::Ref<const RowMatrix>& x) {
  check_input(model, x.cols());
  BatchTrace t;
  t.pre_activations.reserve(model.hidden.size());
  t.activations.reserve(model.hidden.size());
  for (std::size_t i = 0; i < model.hidden.size(); ++i) {
    const Layer& h = model.hidden[i];
    Matrix a = (i == 0 ? Matrix(x * h.weights.transpose()) : Matrix(t.activations.back() * h.weights.transpose()));
    a.rowwise() += h.biases.transpose();
    t.activations.push_back(a.cwiseMax(0.0));
    t.pre_activations.push_back(std::move(a));
  }
  const Layer& c = model.classifier;
  t.scores = model.hidden.empty() ? Matrix(x * c.weights.transpose())
                                  : Matrix(t.activations.back() * c.weights.transpose());
  t.scores.rowwise() += c.biases.transpose();
  return t;
}

Matrix scores(const Mlp& model, const Eigen::Ref<const RowMatrix>& x) {
  check_input(model, x.cols());
  Matrix z;
  for (std::size_t i = 0; i < model.hidden.size(); ++i) {
    const Layer& h = model.hidden[i];
    Matrix a = i == 0 ? Matrix(x * h.weights.transpose()) : Matrix(z * h.weights.transpose());
    a.rowwise() += h.biases.transpose();
    z = a.cwiseMax(0.0);
  }
  const Layer& c = model.classifier;
  Matrix s = model.hidden.empty() ? Matrix(x * c.weights.transpose()) : Matrix(z * c.weights.transpose());
  s.rowwise() += c.biases.transpose();
  return s;
}

int predict_class(const Eigen::Ref<const Vector>& s) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < s.size(); ++j) {
    if (s(j) > s(best)) best = j;
  }
  return static_cast<int>(best);
}

std::vector<int> predict(const Mlp& model, const Dataset& data) {
  const Matrix s = scores(model, data.features);
  std::vector<int> out(data.size());
  for (Eigen::Index i = 0; i < s.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_class(s.row(i).transpose());
  return out;
}

double accuracy(const Mlp& model, const Dataset& data) {
  if (data.empty()) throw Error("accuracy of an empty data set");
  const auto pred = predict(model, data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace lcnn
