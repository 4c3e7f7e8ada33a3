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

#include <iosfwd>
#include <optional>
#include <vector>

namespace lcnn {

struct PruneSweepConfig {
  double t_min = 1e-3;
  /// 50 for fully connected nets.
  std::size_t steps = 50;
  /// Largest allowed absolute drop in validation accuracy.
  double tolerance = 0.01;

  void validate() const;
};

/// Thresholds t_k = t_min + k * (max|w| - t_min) / steps for k = 1..steps.
/// A layer whose largest magnitude is <= t_min gets the single value t_min.
std::vector<double> threshold_schedule(const Layer& layer, const PruneSweepConfig& config);

/// Threshold of `layer` at sweep step `step`: t_min for step 0 (and for
/// degenerate layers), t_step otherwise. Steps past the end clamp to the last.
double threshold_at(const Layer& layer, std::size_t step, const PruneSweepConfig& config);

/// Zeroes every weight with |w| below the layer's step threshold and marks
/// it in the layer mask. Biases are left alone; existing masks are kept.
Mlp prune_at(const Mlp& model, std::size_t step, const PruneSweepConfig& config);

/// Same as prune_at with explicit per-layer thresholds.
Mlp prune_with_thresholds(const Mlp& model, const std::vector<double>& thresholds);

struct PruneStep {
  std::size_t step = 0;
  std::vector<double> thresholds;
  std::size_t nonzeros = 0;
  double val_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

struct CompressionRatio {
  double ratio = 1.0;
  /// Set when nothing survived; `ratio` then holds the before-count.
  bool all_pruned = false;
};

/// Nonzero weights of `before` over nonzero weights of `after` (biases excluded).
CompressionRatio compression_ratio(const Mlp& before, const Mlp& after);

struct PruneResult {
  double baseline_val_accuracy = 0.0;
  std::size_t baseline_nonzeros = 0;
  std::vector<PruneStep> curve;  // steps 0..config.steps
  std::size_t selected_step = 0;
  /// True when no step met the tolerance and step 0 was taken by default.
  bool tolerance_unmet = false;
  Mlp pruned_model;
  CompressionRatio ratio;
};

/// Largest step whose accuracy is within `tolerance` of `baseline`, or
/// nullopt if none is.
std::optional<std::size_t> select_step(const std::vector<double>& accuracies, double baseline, double tolerance);

/// Evaluates every step 0..steps on `val` (and `test` when given), then
/// keeps the sparsest step whose validation drop stays within tolerance.
PruneResult sweep_and_select(const Mlp& model, const Dataset& val, const PruneSweepConfig& config,
                             const Dataset* test = nullptr);

/// CSV: step,thresholds,nonzeros,val_acc,test_acc (thresholds ';'-joined per layer).
void write_prune_csv(std::ostream& out, const PruneResult& result);

}  // namespace lcnn
