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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcnn {

/// How per-sample objective terms are scaled on a mini-batch of size B
/// drawn from M training samples.
enum class SampleNormalization {
  sum,   // M / B: stochastic estimate of the summed objective
  mean,  // 1 / B: stochastic estimate of the per-sample mean objective
};

std::string_view to_string(SampleNormalization n);
SampleNormalization parse_normalization(std::string_view s);

struct TrainConfig {
  std::size_t epochs = 500;
  std::size_t batch_size = 8;
  double lr0 = 0.1;
  /// Seeds the per-epoch shuffles.
  std::uint64_t seed = 0;
  RegularizerSpec spec;
  SampleNormalization normalization = SampleNormalization::mean;
  /// Return the epoch with the best validation accuracy instead of the last.
  bool keep_best = true;

  void validate() const;
  double sample_scale(std::size_t n_train, std::size_t batch) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  LossBreakdown loss;  // full training objective at the end of the epoch
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// 1-based epoch of the returned snapshot.
  std::size_t selected_epoch = 0;

  double selected_val_accuracy() const;
};

struct TrainResult {
  Mlp model;
  TrainHistory history;
};

/// lr0 / epoch for epoch >= 1.
double lr_at_epoch(double lr0, std::size_t epoch);

/// Visiting order of the training samples in `epoch` (1-based).
std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n_samples);

/// Mini-batch SGD on the full objective. Throws DivergenceError as soon as
/// the loss becomes non-finite.
TrainResult train(Mlp model, const Dataset& train, const Dataset& val, const TrainConfig& config);

/// CSV: epoch,lr,hinge,l2,l1,data_dep,total,train_acc,val_acc
void write_history_csv(std::ostream& out, const TrainHistory& history);

/// A regularizer combination such as "H+W1+LCA".
struct Combo {
  bool l2 = false;
  bool l1 = false;
  Scope scope = Scope::none;

  static Combo parse(std::string_view name);
  std::string name() const;
  bool uses_c() const { return l2 || l1; }
  bool uses_d() const { return scope != Scope::none; }
  /// The grid value c drives C for W2 and l1 for W1.
  RegularizerSpec make_spec(double c, double d) const;
};

struct GridSpec {
  std::vector<double> c_values;
  std::vector<double> d_values;
  std::vector<double> lr_values;

  /// C in 1e-4..1e-1, D in 1e-8..1e-4 (decades), lr in {1e-2, 1e-1}.
  static GridSpec defaults();
};

struct GridCell {
  double c = 0.0;
  double d = 0.0;
  double lr = 0.0;
};

/// Cells that apply to `combo`; inactive coefficients collapse to {0}.
/// Sorted by (c, d, lr) ascending.
std::vector<GridCell> expand_grid(const Combo& combo, const GridSpec& grid);

struct GridRun {
  GridCell cell;
  bool diverged = false;
  std::string error;
  double val_accuracy = 0.0;
  std::size_t selected_epoch = 0;
};

struct GridResult {
  Mlp model;
  TrainConfig config;
  TrainHistory history;
  GridCell cell;
  std::vector<GridRun> runs;
};

struct GridOptions {
  std::uint64_t init_seed = 0;
  /// Worker threads; 0 means hardware concurrency.
  std::size_t threads = 0;
};

/// Trains one model per grid cell from the same initial weights and returns
/// the best by validation accuracy (ties: smaller c, then d, then lr).
/// Throws if every cell diverged.
GridResult grid_search(const Dataset& train, const Dataset& val, std::span<const std::size_t> widths,
                       const Combo& combo, const GridSpec& grid, const TrainConfig& base,
                       const GridOptions& options = {});

/// CSV: c,d,lr,val_acc,selected_epoch,diverged
void write_grid_csv(std::ostream& out, std::span<const GridRun> runs);

}  // namespace lcnn
