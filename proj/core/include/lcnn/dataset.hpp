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

#include "lcnn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcnn {

/// Dense labelled data set: one sample per row, labels as 0-based class ids.
struct Dataset {
  RowMatrix features;
  std::vector<int> labels;
  /// class id -> original label, sorted ascending. Its size is K.
  std::vector<double> class_labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t n_classes() const { return class_labels.size(); }

  /// Class id of an original label, or nullopt if the label is unknown.
  std::optional<int> class_index(double original_label) const;

  /// Rows `rows` in the given order; shares the label map.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Throws if labels/features/label map disagree.
  void validate() const;
};

/// Parses LIBSVM text (`<label> <idx>:<val> ...`, 1-based ascending indices).
/// Width is max(largest index seen, n_features_hint). Labels are mapped to
/// class ids by the sorted order of the distinct labels.
Dataset parse_libsvm(std::string_view text, std::optional<std::size_t> n_features_hint = {});

Dataset read_libsvm_file(const std::filesystem::path& path,
                         std::optional<std::size_t> n_features_hint = {});

/// Reads several files that belong to one problem (train/val/test). All
/// results share one width and one label map built from the union of labels.
std::vector<Dataset> read_libsvm_files(std::span<const std::filesystem::path> paths,
                                       std::optional<std::size_t> n_features_hint = {});

/// Writes `data` back as LIBSVM text using the original labels.
/// Values are printed with 17 significant digits so a reparse is exact.
std::string to_libsvm(const Dataset& data);

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded random partition into train/val/test. Sizes are
/// round(M * train), round(M * val) and the remainder.
Splits split(const Dataset& data, const SplitSpec& spec);

/// Per-feature standardization fitted on training data.
struct FeatureScaler {
  static constexpr double kStdFloor = 1e-12;

  Vector mean;
  Vector stddev;

  static FeatureScaler fit(const Dataset& train);
  Dataset apply(const Dataset& data) const;
  void apply_in_place(Dataset& data) const;
};

struct Standardized {
  Dataset train;
  std::vector<Dataset> others;
  FeatureScaler scaler;
};

/// Standardizes `train` to zero mean / unit variance and scales `others`
/// with the training statistics.
Standardized standardize(const Dataset& train, std::span<const Dataset> others = {});

}  // namespace lcnn
