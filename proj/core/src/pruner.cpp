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

#include "lcnn/pruner.hpp"

#include "lcnn/csv.hpp"

#include <cmath>
#include <ostream>

namespace lcnn {

void PruneSweepConfig::validate() const {
  if (!(t_min > 0.0)) throw Error("t_min must be positive");
  if (steps < 1) throw Error("prune sweep needs at least one step");
  if (!(tolerance >= 0.0)) throw Error("tolerance must be >= 0");
}

namespace {

double max_magnitude(const Layer& layer) {
  return layer.weights.size() == 0 ? 0.0 : layer.weights.cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<double> threshold_schedule(const Layer& layer, const PruneSweepConfig& config) {
  config.validate();
  if (layer.weights.size() == 0) throw Error("cannot prune a layer without weights");
  const double top = max_magnitude(layer);
  if (top <= config.t_min) return {config.t_min};
  std::vector<double> t(config.steps);
  const double span = top - config.t_min;
  for (std::size_t k = 1; k <= config.steps; ++k) {
    t[k - 1] = k == config.steps ? top : config.t_min + span * static_cast<double>(k) / static_cast<double>(config.steps);
  }
  return t;
}

double threshold_at(const Layer& layer, std::size_t step, const PruneSweepConfig& config) {
  if (step == 0) return config.t_min;
  const auto schedule = threshold_schedule(layer, config);
  return schedule[std::min(step, schedule.size()) - 1];
}

Mlp prune_with_thresholds(const Mlp& model, const std::vector<double>& thresholds) {
  if (thresholds.size() != model.n_layers()) throw DimensionError("need one threshold per layer");
  Mlp out = model;
  for (std::size_t k = 0; k < out.n_layers(); ++k) {
    Layer& l = out.layer(k);
    Mask keep = l.weights.array().abs() >= thresholds[k];
    if (l.has_mask()) keep = keep && l.mask;
    l.mask = std::move(keep);
    l.apply_mask();
  }
  return out;
}

Mlp prune_at(const Mlp& model, std::size_t step, const PruneSweepConfig& config) {
  std::vector<double> t;
  for (std::size_t k = 0; k < model.n_layers(); ++k) t.push_back(threshold_at(model.layer(k), step, config));
  return prune_with_thresholds(model, t);
}

CompressionRatio compression_ratio(const Mlp& before, const Mlp& after) {
  if (before.widths() != after.widths()) throw DimensionError("compression ratio needs identical architectures");
  const auto nb = static_cast<double>(before.nonzero_weights());
  const auto na = static_cast<double>(after.nonzero_weights());
  if (na == 0.0) return {nb, true};
  return {nb / na, false};
}

std::optional<std::size_t> select_step(const std::vector<double>& accuracies, double baseline, double tolerance) {
  // Accuracies are ratios of counts; the slack absorbs rounding in baseline - tolerance.
  const double floor = baseline - tolerance - 1e-12;
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < accuracies.size(); ++s) {
    if (accuracies[s] >= floor) best = s;
  }
  return best;
}

PruneResult sweep_and_select(const Mlp& model, const Dataset& val, const PruneSweepConfig& config,
                             const Dataset* test) {
  config.validate();
  if (val.empty()) throw Error("pruning sweep needs a nonempty validation set");

  PruneResult r;
  r.baseline_val_accuracy = accuracy(model, val);
  r.baseline_nonzeros = model.nonzero_weights();

  std::vector<double> accs;
  for (std::size_t step = 0; step <= config.steps; ++step) {
    PruneStep ps;
    ps.step = step;
    for (std::size_t k = 0; k < model.n_layers(); ++k) ps.thresholds.push_back(threshold_at(model.layer(k), step, config));
    const Mlp pruned = prune_with_thresholds(model, ps.thresholds);
    ps.nonzeros = pruned.nonzero_weights();
    ps.val_accuracy = accuracy(pruned, val);
    if (test) ps.test_accuracy = accuracy(pruned, *test);
    accs.push_back(ps.val_accuracy);
    r.curve.push_back(std::move(ps));
  }

  const auto chosen = select_step(accs, r.baseline_val_accuracy, config.tolerance);
  r.tolerance_unmet = !chosen.has_value();
  r.selected_step = chosen.value_or(0);
  r.pruned_model = prune_with_thresholds(model, r.curve[r.selected_step].thresholds);
  r.ratio = compression_ratio(model, r.pruned_model);
  return r;
}

void write_prune_csv(std::ostream& out, const PruneResult& result) {
  CsvWriter csv(out);
  csv.row({"step", "thresholds", "nonzeros", "val_acc", "test_acc"});
  for (const auto& s : result.curve) {
    std::string t;
    for (std::size_t k = 0; k < s.thresholds.size(); ++k) {
      if (k) t += ';';
      t += format_number(s.thresholds[k]);
    }
    csv.row({std::to_string(s.step), t, std::to_string(s.nonzeros), format_number(s.val_accuracy),
             s.test_accuracy ? format_number(*s.test_accuracy) : std::string()});
  }
}

}  // namespace lcnn
