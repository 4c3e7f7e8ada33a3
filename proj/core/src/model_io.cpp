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

#include "lcnn/model_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lcnn {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  }
  return a;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& a, Eigen::Index n, const char* what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != n) {
    throw Error(std::string("model file: ") + what + " has the wrong length");
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json spec_json(const RegularizerSpec& s) {
  return {{"C", s.C}, {"D", s.D}, {"l1", s.l1}, {"scope", std::string(to_string(s.scope))}};
}

RegularizerSpec spec_from(const json& j) {
  RegularizerSpec s;
  s.C = j.at("C").get<double>();
  s.D = j.at("D").get<double>();
  s.l1 = j.at("l1").get<double>();
  s.scope = parse_scope(j.at("scope").get<std::string>());
  return s;
}

json layer_json(const Layer& l) {
  json j = {{"rows", l.outputs()}, {"cols", l.inputs()}, {"weights", matrix_json(l.weights)},
            {"biases", vector_json(l.biases)}};
  if (l.has_mask()) {
    json m = json::array();
    for (Eigen::Index r = 0; r < l.mask.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.mask.cols(); ++c) m.push_back(l.mask(r, c) ? 1 : 0);
    }
    j["mask"] = std::move(m);
  }
  return j;
}

Layer layer_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& w = j.at("weights");
  if (!w.is_array() || static_cast<Eigen::Index>(w.size()) != rows * cols) {
    throw Error("model file: weight array does not match rows x cols");
  }
  Layer l;
  l.weights.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) l.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)].get<double>();
  }
  l.biases = vector_from(j.at("biases"), rows, "biases");
  if (j.contains("mask")) {
    const json& m = j["mask"];
    if (!m.is_array() || static_cast<Eigen::Index>(m.size()) != rows * cols) {
      throw Error("model file: mask does not match rows x cols");
    }
    l.mask.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) l.mask(r, c) = m[static_cast<std::size_t>(r * cols + c)].get<int>() != 0;
    }
  }
  return l;
}

}  // namespace

std::string model_to_json(const Mlp& model, const Provenance& provenance) {
  model.validate();
  json j;
  j["format"] = "lcnn-mlp";
  j["version"] = kModelFormatVersion;
  j["activation"] = "relu";
  j["widths"] = model.widths();
  json layers = json::array();
  for (std::size_t k = 0; k < model.n_layers(); ++k) layers.push_back(layer_json(model.layer(k)));
  j["layers"] = std::move(layers);

  json p = json::object();
  if (provenance.train) {
    const TrainConfig& t = *provenance.train;
    p["train"] = {{"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"lr0", t.lr0},
                  {"seed", t.seed},
                  {"normalization", std::string(to_string(t.normalization))},
                  {"keep_best", t.keep_best},
                  {"regularizer", spec_json(t.spec)}};
  }
  if (provenance.scaler) {
    p["scaler"] = {{"mean", vector_json(provenance.scaler->mean)}, {"std", vector_json(provenance.scaler->stddev)}};
  }
  p["notes"] = provenance.notes;
  j["provenance"] = std::move(p);
  return j.dump(1) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "lcnn-mlp") throw Error("not an lcnn model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("model file version " + std::to_string(version) + " unsupported (expected " +
                  std::to_string(kModelFormatVersion) + ")");
    }
    const json& layers = j.at("layers");
    if (!layers.is_array() || layers.empty()) throw Error("model file has no layers");

    ModelFile f;
    for (std::size_t k = 0; k + 1 < layers.size(); ++k) f.model.hidden.push_back(layer_from(layers[k]));
    f.model.classifier = layer_from(layers.back());
    f.model.validate();

    const json& p = j.at("provenance");
    if (p.contains("train")) {
      const json& t = p["train"];
      TrainConfig c;
      c.epochs = t.at("epochs").get<std::size_t>();
      c.batch_size = t.at("batch_size").get<std::size_t>();
      c.lr0 = t.at("lr0").get<double>();
      c.seed = t.at("seed").get<std::uint64_t>();
      c.normalization = parse_normalization(t.at("normalization").get<std::string>());
      c.keep_best = t.at("keep_best").get<bool>();
      c.spec = spec_from(t.at("regularizer"));
      f.provenance.train = c;
    }
    if (p.contains("scaler")) {
      FeatureScaler s;
      const auto n = static_cast<Eigen::Index>(f.model.input_width());
      s.mean = vector_from(p["scaler"].at("mean"), n, "scaler mean");
      s.stddev = vector_from(p["scaler"].at("std"), n, "scaler std");
      f.provenance.scaler = std::move(s);
    }
    if (p.contains("notes")) f.provenance.notes = p["notes"].get<std::map<std::string, std::string>>();
    return f;
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const Mlp& model, const Provenance& provenance) {
  const std::string text = model_to_json(model, provenance);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return content_hash(ss.str());
}

}  // namespace lcnn
