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

#include "lcnn/dataset.hpp"

#include "lcnn/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace lcnn {

namespace {

struct RawRow {
  double label = 0.0;
  std::vector<std::pair<std::size_t, double>> entries;
};

struct RawFile {
  std::vector<RawRow> rows;
  std::size_t max_index = 0;
};

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_index(std::string_view tok, std::size_t& out) {
  if (tok.empty()) return false;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

RawFile parse_raw(std::string_view text) {
  RawFile file;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    pos = nl + 1;
    ++line_no;

    const auto tokens = tokenize(line);
    if (tokens.empty()) {
      if (nl == text.size()) break;
      continue;
    }

    RawRow row;
    if (!parse_double(tokens[0], row.label) || !std::isfinite(row.label)) {
      throw ParseError("invalid label '" + std::string(tokens[0]) + "'", line_no);
    }
    std::size_t prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected <index>:<value>, got '" + std::string(tok) + "'", line_no);
      }
      std::size_t idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx == 0) {
        throw ParseError("invalid feature index in '" + std::string(tok) + "'", line_no);
      }
      if (!parse_double(tok.substr(colon + 1), val)) {
        throw ParseError("invalid feature value in '" + std::string(tok) + "'", line_no);
      }
      if (idx <= prev) {
        throw ParseError("feature indices must be strictly ascending (" + std::to_string(idx) +
                             " after " + std::to_string(prev) + ")",
                         line_no);
      }
      prev = idx;
      row.entries.emplace_back(idx, val);
    }
    file.max_index = std::max(file.max_index, prev);
    file.rows.push_back(std::move(row));
    if (nl == text.size()) break;
  }
  if (file.rows.empty()) throw ParseError("empty input", 0);
  return file;
}

Dataset densify(const RawFile& raw, std::size_t width, const std::vector<double>& class_labels) {
  Dataset d;
  d.class_labels = class_labels;
  d.features = RowMatrix::Zero(static_cast<Eigen::Index>(raw.rows.size()),
                               static_cast<Eigen::Index>(width));
  d.labels.reserve(raw.rows.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& row = raw.rows[i];
    for (const auto& [idx, val] : row.entries) {
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx - 1)) = val;
    }
    d.labels.push_back(*d.class_index(row.label));
  }
  return d;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<int> Dataset::class_index(double original_label) const {
  const auto it = std::lower_bound(class_labels.begin(), class_labels.end(), original_label);
  if (it == class_labels.end() || *it != original_label) return std::nullopt;
  return static_cast<int>(it - class_labels.begin());
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.class_labels = class_labels;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DimensionError("feature rows (" + std::to_string(features.rows()) +
                         ") != label count (" + std::to_string(labels.size()) + ")");
  }
  if (!std::is_sorted(class_labels.begin(), class_labels.end()) ||
      std::adjacent_find(class_labels.begin(), class_labels.end()) != class_labels.end()) {
    throw Error("label map must be strictly increasing");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= class_labels.size()) {
      throw Error("label index " + std::to_string(y) + " outside [0, " +
                  std::to_string(class_labels.size()) + ")");
    }
  }
}

Dataset parse_libsvm(std::string_view text, std::optional<std::size_t> n_features_hint) {
  const RawFile raw = parse_raw(text);
  std::set<double> distinct;
  for (const auto& r : raw.rows) distinct.insert(r.label);
  const std::size_t width = std::max(raw.max_index, n_features_hint.value_or(0));
  return densify(raw, width, {distinct.begin(), distinct.end()});
}

Dataset read_libsvm_file(const std::filesystem::path& path,
                         std::optional<std::size_t> n_features_hint) {
  const std::string text = read_text(path);
  try {
    return parse_libsvm(text, n_features_hint);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::vector<Dataset> read_libsvm_files(std::span<const std::filesystem::path> paths,
                                       std::optional<std::size_t> n_features_hint) {
  std::vector<RawFile> raws;
  raws.reserve(paths.size());
  for (const auto& p : paths) {
    const std::string text = read_text(p);
    try {
      raws.push_back(parse_raw(text));
    } catch (const ParseError& e) {
      throw ParseError(p.string() + ": " + e.what(), e.line());
    }
  }
  std::set<double> distinct;
  std::size_t width = n_features_hint.value_or(0);
  for (const auto& raw : raws) {
    width = std::max(width, raw.max_index);
    for (const auto& r : raw.rows) distinct.insert(r.label);
  }
  const std::vector<double> class_labels(distinct.begin(), distinct.end());
  std::vector<Dataset> out;
  out.reserve(raws.size());
  for (const auto& raw : raws) out.push_back(densify(raw, width, class_labels));
  return out;
}

std::string to_libsvm(const Dataset& data) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data.class_labels[static_cast<std::size_t>(data.labels[i])]);
    out += buf;
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      const double v = data.features(static_cast<Eigen::Index>(i), j);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, " %lld:%.17g", static_cast<long long>(j + 1), v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (!(f >= 0.0 && f < 1.0)) throw Error("split fractions must lie in [0, 1)");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw Error("split fractions must sum to 1");
  }
}

Splits split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  if (data.empty()) throw Error("cannot split an empty data set");

  const auto m = static_cast<double>(data.size());
  const auto n_train = static_cast<std::size_t>(std::llround(m * spec.train_fraction));
  const auto n_val = static_cast<std::size_t>(std::llround(m * spec.val_fraction));
  const std::size_t taken = std::min(data.size(), n_train + n_val);
  const std::size_t n_test = data.size() - taken;
  if (n_train == 0) throw Error("empty train split");
  if (n_val == 0 || n_train + n_val > data.size()) throw Error("empty validation split");
  if (n_test == 0) throw Error("empty test split");

  Rng rng(derive_seed(spec.seed, "split"));
  const auto order = permutation(data.size(), rng);
  const std::span<const std::size_t> all(order);
  return Splits{data.subset(all.subspan(0, n_train)), data.subset(all.subspan(n_train, n_val)),
                data.subset(all.subspan(n_train + n_val))};
}

FeatureScaler FeatureScaler::fit(const Dataset& train) {
  if (train.empty()) throw Error("cannot standardize with an empty training set");
  FeatureScaler s;
  const auto m = static_cast<double>(train.size());
  s.mean = train.features.colwise().sum().transpose() / m;
  s.stddev.resize(s.mean.size());
  for (Eigen::Index j = 0; j < s.mean.size(); ++j) {
    const double var = (train.features.col(j).array() - s.mean(j)).square().sum() / m;
    s.stddev(j) = std::max(std::sqrt(var), kStdFloor);
  }
  return s;
}

void FeatureScaler::apply_in_place(Dataset& data) const {
  if (data.features.cols() != mean.size()) {
    throw DimensionError("scaler fitted on " + std::to_string(mean.size()) +
                         " features, data has " + std::to_string(data.features.cols()));
  }
  data.features.rowwise() -= mean.transpose();
  data.features.array().rowwise() /= stddev.transpose().array();
}

Dataset FeatureScaler::apply(const Dataset& data) const {
  Dataset out = data;
  apply_in_place(out);
  return out;
}

Standardized standardize(const Dataset& train, std::span<const Dataset> others) {
  Standardized out;
  out.scaler = FeatureScaler::fit(train);
  out.train = out.scaler.apply(train);
  out.others.reserve(others.size());
  for (const auto& d : others) out.others.push_back(out.scaler.apply(d));
  return out;
}

}  // namespace lcnn
