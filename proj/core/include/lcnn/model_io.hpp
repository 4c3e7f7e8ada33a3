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
#include "lcnn/trainer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace lcnn {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to tell where a model came from and how to feed it.
struct Provenance {
  std::optional<TrainConfig> train;
  std::optional<FeatureScaler> scaler;
  std::map<std::string, std::string> notes;
};

struct ModelFile {
  Mlp model;
  Provenance provenance;
};

/// JSON document: {"format": "lcnn-mlp", "version": 1, "layers": [...], "provenance": {...}}.
/// Weights are stored row-major as shortest round-trip decimals.
std::string model_to_json(const Mlp& model, const Provenance& provenance = {});
ModelFile model_from_json(std::string_view text);

void save_model(const std::filesystem::path& path, const Mlp& model, const Provenance& provenance = {});
ModelFile load_model(const std::filesystem::path& path);

/// FNV-1a 64-bit digest as 16 hex characters.
std::string content_hash(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

}  // namespace lcnn
