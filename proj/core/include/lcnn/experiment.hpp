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
#include "lcnn/pruner.hpp"
#include "lcnn/quantizer.hpp"
#include "lcnn/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcnn {

/// Either one LIBSVM file cut by `split`, or three files (train, val, test).
struct DataSource {
  std::vector<std::filesystem::path> files;
  SplitSpec split;
  std::optional<std::size_t> n_features;

  void validate() const;
};

struct LoadedData {
  Dataset train;
  Dataset val;
  Dataset test;
  std::optional<FeatureScaler> scaler;
};

/// Reads and splits `source`; standardizes with training statistics when
/// `standardize` is set.
LoadedData load_data(const DataSource& source, bool standardize);

/// Flat `key = value` experiment description. Every key is explicit;
/// unknown keys are rejected.
struct ExperimentConfig {
  std::string name = "experiment";
  /// Row label in the emitted tables; defaults to the first data file's stem.
  std::string dataset;
  DataSource data;
  std::vector<std::size_t> hidden{50};
  std::vector<std::string> combos{"H"};
  GridSpec grid = GridSpec::defaults();
  TrainConfig train;
  PruneSweepConfig prune;
  std::size_t finetune_epochs = 0;
  QuantSweepConfig quant;
  /// Choose fraction bits on the test set (as the original protocol does)
  /// instead of the validation set.
  bool quant_select_on_test = false;
  bool standardize = true;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::filesystem::path out_dir = "runs";

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Applies one `key = value` pair.
  void set(std::string_view key, std::string_view value);
  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;
  std::string hash() const;
  void validate() const;
  std::string dataset_name() const;
};

struct ComboReport {
  std::string combo;
  bool ok = false;
  std::string failed_stage;
  std::string error;

  GridCell selected;
  std::size_t grid_runs = 0;
  std::size_t grid_diverged = 0;
  std::size_t selected_epoch = 0;

  double unpruned_val = 0.0;
  double unpruned_test = 0.0;
  double pruned_val = 0.0;
  double pruned_test = 0.0;
  std::size_t prune_step = 0;
  bool prune_tolerance_unmet = false;
  std::size_t nonzeros_before = 0;
  std::size_t nonzeros_after = 0;
  double compression_ratio = 1.0;

  /// Smallest T within tolerance (0 when none) and test accuracy there.
  int quant_bits = 0;
  int quant_frac_bits = 0;
  double quant_test = 0.0;
  int pruned_quant_bits = 0;
  int pruned_quant_frac_bits = 0;
  double pruned_quant_test = 0.0;
  double quant_compression_ratio = 1.0;

  QuantReport quant_curve;
  QuantReport pruned_quant_curve;

  std::string model_hash;
  std::string pruned_model_hash;
  std::map<std::string, std::string> artifacts;
};

struct RunReport {
  std::string name;
  std::string dataset;
  std::vector<std::size_t> widths;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string scaling;
  std::string normalization;
  std::string quant_selection;
  std::vector<ComboReport> combos;

  std::size_t depth() const { return widths.size() < 2 ? 0 : widths.size() - 2; }
  bool all_ok() const;
  std::string to_json() const;
  static RunReport from_json(std::string_view text);
  static RunReport load(const std::filesystem::path& path);
};

/// Grid search, pruning and quantization for every combo in `config`.
/// Writes models, CSV curves and report.json under out_dir/name. Stage
/// failures are recorded per combo instead of aborting the run.
RunReport run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// accuracy_fnn<depth>.csv and compression_fnn<depth>.csv (one row per
/// report, combos as columns) plus curves/<dataset>_fnn<depth>_<combo>_{unpruned,pruned}.csv.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_tables(std::span<const RunReport> reports,
                                               const std::filesystem::path& out_dir);

/// "H+W2+LCA" -> "H_W2_LCA"
std::string combo_slug(std::string_view combo);

}  // namespace lcnn
