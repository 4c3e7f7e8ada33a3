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

#include "lcnn/experiment.hpp"

#include "lcnn/csv.hpp"
#include "lcnn/model_io.hpp"
#include "lcnn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lcnn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    const auto tok = trim(s.substr(pos, comma - pos));
    if (!tok.empty()) out.emplace_back(tok);
    pos = comma + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error("config key '" + std::string(key) + "': '" + std::string(v) + "' is not a number");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error("config key '" + std::string(key) + "': '" + std::string(v) + "' is not a nonnegative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config key '" + std::string(key) + "': expected true or false");
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (const auto& t : split_list(v)) out.push_back(to_double(key, t));
  return out;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_csv_file(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text(path, ss.str());
}

}  // namespace

std::string combo_slug(std::string_view combo) {
  std::string s(combo);
  std::replace(s.begin(), s.end(), '+', '_');
  return s;
}

void DataSource::validate() const {
  if (files.size() != 1 && files.size() != 3) throw Error("data needs one file (with split fractions) or three files");
  for (const auto& f : files) {
    if (!fs::exists(f)) throw Error("missing dataset file " + f.string());
  }
  if (files.size() == 1) split.validate();
}

LoadedData load_data(const DataSource& source, bool standardize_features) {
  source.validate();
  LoadedData d;
  if (source.files.size() == 3) {
    auto sets = read_libsvm_files(source.files, source.n_features);
    d.train = std::move(sets[0]);
    d.val = std::move(sets[1]);
    d.test = std::move(sets[2]);
  } else {
    Splits s = split(read_libsvm_file(source.files[0], source.n_features), source.split);
    d.train = std::move(s.train);
    d.val = std::move(s.val);
    d.test = std::move(s.test);
  }
  for (const Dataset* set : {&d.train, &d.val, &d.test}) {
    if (set->empty()) throw Error("empty data split");
  }
  if (standardize_features) {
    d.scaler = FeatureScaler::fit(d.train);
    d.scaler->apply_in_place(d.train);
    d.scaler->apply_in_place(d.val);
    d.scaler->apply_in_place(d.test);
  }
  return d;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const std::string k(trim(key));
  const std::string_view v = trim(value);
  if (k == "name") {
    name = v;
  } else if (k == "dataset") {
    dataset = v;
  } else if (k == "data") {
    data.files.clear();
    for (const auto& f : split_list(v)) data.files.emplace_back(f);
  } else if (k == "split") {
    const auto f = to_doubles(k, v);
    if (f.size() != 3) throw Error("split needs three fractions");
    data.split.train_fraction = f[0];
    data.split.val_fraction = f[1];
    data.split.test_fraction = f[2];
  } else if (k == "n_features") {
    data.n_features = v.empty() ? std::nullopt : std::optional<std::size_t>(to_uint(k, v));
  } else if (k == "arch") {
    hidden.clear();
    if (v != "none") {
      for (const auto& w : split_list(v)) hidden.push_back(to_uint(k, w));
    }
  } else if (k == "combos") {
    combos = split_list(v);
  } else if (k == "grid_c") {
    grid.c_values = to_doubles(k, v);
  } else if (k == "grid_d") {
    grid.d_values = to_doubles(k, v);
  } else if (k == "grid_lr") {
    grid.lr_values = to_doubles(k, v);
  } else if (k == "epochs") {
    train.epochs = to_uint(k, v);
  } else if (k == "batch") {
    train.batch_size = to_uint(k, v);
  } else if (k == "normalization") {
    train.normalization = parse_normalization(v);
  } else if (k == "seed") {
    seed = to_uint(k, v);
  } else if (k == "tolerance") {
    prune.tolerance = to_double(k, v);
    quant.tolerance = prune.tolerance;
  } else if (k == "prune_t_min") {
    prune.t_min = to_double(k, v);
  } else if (k == "prune_steps") {
    prune.steps = to_uint(k, v);
  } else if (k == "finetune_epochs") {
    finetune_epochs = to_uint(k, v);
  } else if (k == "quant_rounding") {
    quant.rounding = parse_rounding(v);
  } else if (k == "quant_select") {
    if (v != "val" && v != "test") throw Error("quant_select must be val or test");
    quant_select_on_test = v == "test";
  } else if (k == "quant_min_bits") {
    quant.min_bits = static_cast<int>(to_uint(k, v));
  } else if (k == "quant_max_bits") {
    quant.max_bits = static_cast<int>(to_uint(k, v));
  } else if (k == "gamma_c") {
    quant.gamma_c = to_double(k, v);
  } else if (k == "standardize") {
    standardize = to_bool(k, v);
  } else if (k == "threads") {
    threads = to_uint(k, v);
  } else if (k == "out") {
    out_dir = std::string(v);
  } else {
    throw Error("unknown config key '" + k + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      c.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream o;
  auto files = [&] {
    std::string s;
    for (std::size_t i = 0; i < data.files.size(); ++i) s += (i ? "," : "") + data.files[i].string();
    return s;
  };
  std::string arch;
  for (std::size_t i = 0; i < hidden.size(); ++i) arch += (i ? "," : "") + std::to_string(hidden[i]);
  std::string combo_list;
  for (std::size_t i = 0; i < combos.size(); ++i) combo_list += (i ? "," : "") + combos[i];
  o << "name = " << name << "\n"
    << "dataset = " << dataset << "\n"
    << "data = " << files() << "\n"
    << "split = " << join_numbers({data.split.train_fraction, data.split.val_fraction, data.split.test_fraction}) << "\n"
    << "n_features = " << (data.n_features ? std::to_string(*data.n_features) : std::string()) << "\n"
    << "arch = " << (hidden.empty() ? std::string("none") : arch) << "\n"
    << "combos = " << combo_list << "\n"
    << "grid_c = " << join_numbers(grid.c_values) << "\n"
    << "grid_d = " << join_numbers(grid.d_values) << "\n"
    << "grid_lr = " << join_numbers(grid.lr_values) << "\n"
    << "epochs = " << train.epochs << "\n"
    << "batch = " << train.batch_size << "\n"
    << "normalization = " << to_string(train.normalization) << "\n"
    << "seed = " << seed << "\n"
    << "tolerance = " << format_number(prune.tolerance) << "\n"
    << "prune_t_min = " << format_number(prune.t_min) << "\n"
    << "prune_steps = " << prune.steps << "\n"
    << "finetune_epochs = " << finetune_epochs << "\n"
    << "quant_rounding = " << to_string(quant.rounding) << "\n"
    << "quant_select = " << (quant_select_on_test ? "test" : "val") << "\n"
    << "quant_min_bits = " << quant.min_bits << "\n"
    << "quant_max_bits = " << quant.max_bits << "\n"
    << "gamma_c = " << format_number(quant.gamma_c) << "\n"
    << "standardize = " << (standardize ? "true" : "false") << "\n"
    << "out = " << out_dir.string() << "\n";
  return o.str();
}

std::string ExperimentConfig::hash() const {
  // Neither the output location nor the thread count changes results.
  ExperimentConfig c = *this;
  c.out_dir.clear();
  return content_hash(c.to_text());
}

std::string ExperimentConfig::dataset_name() const {
  if (!dataset.empty()) return dataset;
  if (data.files.empty()) return name;
  const std::string stem = data.files.front().filename().string();
  return stem.substr(0, stem.find('.'));
}

void ExperimentConfig::validate() const {
  if (name.empty() || name.find('/') != std::string::npos) throw Error("experiment name must be a plain file name");
  data.validate();
  if (combos.empty()) throw Error("no regularizer combos configured");
  for (const auto& c : combos) Combo::parse(c);
  for (auto w : hidden) {
    if (w == 0) throw Error("hidden widths must be positive");
  }
  train.validate();
  prune.validate();
  if (quant.min_bits < 2 || quant.max_bits > 16 || quant.min_bits > quant.max_bits) {
    throw Error("quantization bits must satisfy 2 <= min <= max <= 16");
  }
  if (!(quant.gamma_c >= 0.0)) throw Error("gamma_c must be >= 0");
}

bool RunReport::all_ok() const {
  return std::all_of(combos.begin(), combos.end(), [](const ComboReport& c) { return c.ok; });
}

namespace {

json quant_row_json(const QuantRow& r) {
  return {{"T", r.total_bits},       {"F", r.frac_bits},         {"acc", r.accuracy},
          {"select_acc", r.selection_accuracy}, {"margin", r.margin}, {"loss", r.loss},
          {"gamma", r.gamma},       {"gamma_q", r.gamma_q},     {"cond", r.condition_holds},
          {"within_tolerance", r.within_tolerance}, {"fallback_range", r.fallback_range}};
}

QuantRow quant_row_from(const json& j) {
  QuantRow r;
  r.total_bits = j.at("T").get<int>();
  r.frac_bits = j.at("F").get<int>();
  r.accuracy = j.at("acc").get<double>();
  r.selection_accuracy = j.at("select_acc").get<double>();
  // Infinite margins (all weights quantized away) are stored as null.
  r.margin = j.at("margin").is_null() ? std::numeric_limits<double>::infinity() : j.at("margin").get<double>();
  r.loss = j.at("loss").get<double>();
  r.gamma = j.at("gamma").get<double>();
  r.gamma_q = j.at("gamma_q").get<double>();
  r.condition_holds = j.at("cond").get<bool>();
  r.within_tolerance = j.at("within_tolerance").get<bool>();
  r.fallback_range = j.at("fallback_range").get<bool>();
  return r;
}

json quant_json(const QuantReport& q) {
  json rows = json::array();
  for (const auto& r : q.rows) rows.push_back(quant_row_json(r));
  return {{"full_precision", quant_row_json(q.full_precision)}, {"rows", rows}};
}

QuantReport quant_from(const json& j) {
  QuantReport q;
  q.full_precision = quant_row_from(j.at("full_precision"));
  for (const auto& r : j.at("rows")) q.rows.push_back(quant_row_from(r));
  return q;
}

}  // namespace

std::string RunReport::to_json() const {
  json j;
  j["name"] = name;
  j["dataset"] = dataset;
  j["widths"] = widths;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["scaling"] = scaling;
  j["normalization"] = normalization;
  j["quant_selection"] = quant_selection;
  json cs = json::array();
  for (const auto& c : combos) {
    cs.push_back({{"combo", c.combo},
                  {"ok", c.ok},
                  {"failed_stage", c.failed_stage},
                  {"error", c.error},
                  {"selected", {{"c", c.selected.c}, {"d", c.selected.d}, {"lr", c.selected.lr}}},
                  {"grid_runs", c.grid_runs},
                  {"grid_diverged", c.grid_diverged},
                  {"selected_epoch", c.selected_epoch},
                  {"unpruned_val", c.unpruned_val},
                  {"unpruned_test", c.unpruned_test},
                  {"pruned_val", c.pruned_val},
                  {"pruned_test", c.pruned_test},
                  {"prune_step", c.prune_step},
                  {"prune_tolerance_unmet", c.prune_tolerance_unmet},
                  {"nonzeros_before", c.nonzeros_before},
                  {"nonzeros_after", c.nonzeros_after},
                  {"compression_ratio", c.compression_ratio},
                  {"quant_bits", c.quant_bits},
                  {"quant_frac_bits", c.quant_frac_bits},
                  {"quant_test", c.quant_test},
                  {"pruned_quant_bits", c.pruned_quant_bits},
                  {"pruned_quant_frac_bits", c.pruned_quant_frac_bits},
                  {"pruned_quant_test", c.pruned_quant_test},
                  {"quant_compression_ratio", c.quant_compression_ratio},
                  {"quant_curve", quant_json(c.quant_curve)},
                  {"pruned_quant_curve", quant_json(c.pruned_quant_curve)},
                  {"model_hash", c.model_hash},
                  {"pruned_model_hash", c.pruned_model_hash},
                  {"artifacts", c.artifacts}});
  }
  j["combos"] = std::move(cs);
  return j.dump(1) + "\n";
}

RunReport RunReport::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    RunReport r;
    r.name = j.at("name").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.widths = j.at("widths").get<std::vector<std::size_t>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.scaling = j.at("scaling").get<std::string>();
    r.normalization = j.at("normalization").get<std::string>();
    r.quant_selection = j.at("quant_selection").get<std::string>();
    for (const auto& c : j.at("combos")) {
      ComboReport cr;
      cr.combo = c.at("combo").get<std::string>();
      cr.ok = c.at("ok").get<bool>();
      cr.failed_stage = c.at("failed_stage").get<std::string>();
      cr.error = c.at("error").get<std::string>();
      cr.selected = {c.at("selected").at("c").get<double>(), c.at("selected").at("d").get<double>(),
                     c.at("selected").at("lr").get<double>()};
      cr.grid_runs = c.at("grid_runs").get<std::size_t>();
      cr.grid_diverged = c.at("grid_diverged").get<std::size_t>();
      cr.selected_epoch = c.at("selected_epoch").get<std::size_t>();
      cr.unpruned_val = c.at("unpruned_val").get<double>();
      cr.unpruned_test = c.at("unpruned_test").get<double>();
      cr.pruned_val = c.at("pruned_val").get<double>();
      cr.pruned_test = c.at("pruned_test").get<double>();
      cr.prune_step = c.at("prune_step").get<std::size_t>();
      cr.prune_tolerance_unmet = c.at("prune_tolerance_unmet").get<bool>();
      cr.nonzeros_before = c.at("nonzeros_before").get<std::size_t>();
      cr.nonzeros_after = c.at("nonzeros_after").get<std::size_t>();
      cr.compression_ratio = c.at("compression_ratio").get<double>();
      cr.quant_bits = c.at("quant_bits").get<int>();
      cr.quant_frac_bits = c.at("quant_frac_bits").get<int>();
      cr.quant_test = c.at("quant_test").get<double>();
      cr.pruned_quant_bits = c.at("pruned_quant_bits").get<int>();
      cr.pruned_quant_frac_bits = c.at("pruned_quant_frac_bits").get<int>();
      cr.pruned_quant_test = c.at("pruned_quant_test").get<double>();
      cr.quant_compression_ratio = c.at("quant_compression_ratio").get<double>();
      cr.quant_curve = quant_from(c.at("quant_curve"));
      cr.pruned_quant_curve = quant_from(c.at("pruned_quant_curve"));
      cr.model_hash = c.at("model_hash").get<std::string>();
      cr.pruned_model_hash = c.at("pruned_model_hash").get<std::string>();
      cr.artifacts = c.at("artifacts").get<std::map<std::string, std::string>>();
      r.combos.push_back(std::move(cr));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt run report: ") + e.what());
  }
}

RunReport RunReport::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

void run_combo(const ExperimentConfig& config, const LoadedData& data, const std::vector<std::size_t>& widths,
               const fs::path& dir, ComboReport& rep, std::ostream* log) {
  const Combo combo = Combo::parse(rep.combo);
  const std::string config_hash = config.hash();
  fs::create_directories(dir);

  rep.failed_stage = "train";
  TrainConfig base = config.train;
  base.seed = derive_seed(config.seed, "shuffle");
  GridOptions opts;
  opts.init_seed = derive_seed(config.seed, "init");
  opts.threads = config.threads;
  GridResult g = grid_search(data.train, data.val, widths, combo, config.grid, base, opts);
  rep.selected = g.cell;
  rep.grid_runs = g.runs.size();
  rep.grid_diverged = static_cast<std::size_t>(
      std::count_if(g.runs.begin(), g.runs.end(), [](const GridRun& r) { return r.diverged; }));
  rep.selected_epoch = g.history.selected_epoch;
  rep.unpruned_val = accuracy(g.model, data.val);
  rep.unpruned_test = accuracy(g.model, data.test);

  Provenance prov;
  prov.train = g.config;
  prov.scaler = data.scaler;
  prov.notes = {{"combo", combo.name()},
                {"dataset", config.dataset_name()},
                {"config_hash", config_hash},
                {"seed", std::to_string(config.seed)},
                {"stage", "trained"}};
  save_model(dir / "model.json", g.model, prov);
  rep.model_hash = file_hash(dir / "model.json");
  write_csv_file(dir / "history.csv", [&](std::ostream& o) { write_history_csv(o, g.history); });
  write_csv_file(dir / "grid.csv", [&](std::ostream& o) { write_grid_csv(o, g.runs); });
  rep.artifacts["model"] = "model.json";
  rep.artifacts["history"] = "history.csv";
  rep.artifacts["grid"] = "grid.csv";
  if (log) {
    *log << "[" << config.name << "] " << rep.combo << ": c=" << g.cell.c << " d=" << g.cell.d << " lr=" << g.cell.lr
         << " val=" << rep.unpruned_val << " test=" << rep.unpruned_test << "\n";
  }

  rep.failed_stage = "prune";
  PruneResult pr = sweep_and_select(g.model, data.val, config.prune, &data.test);
  Mlp pruned = pr.pruned_model;
  if (config.finetune_epochs > 0) {
    TrainConfig ft = g.config;
    ft.epochs = config.finetune_epochs;
    ft.seed = derive_seed(config.seed, "finetune");
    pruned = train(pruned, data.train, data.val, ft).model;
  }
  rep.prune_step = pr.selected_step;
  rep.prune_tolerance_unmet = pr.tolerance_unmet;
  rep.nonzeros_before = g.model.nonzero_weights();
  rep.nonzeros_after = pruned.nonzero_weights();
  rep.compression_ratio = compression_ratio(g.model, pruned).ratio;
  prov.notes["stage"] = "pruned";
  prov.notes["parent_model_hash"] = rep.model_hash;
  prov.notes["prune_step"] = std::to_string(pr.selected_step);
  save_model(dir / "pruned_model.json", pruned, prov);
  write_csv_file(dir / "prune_curve.csv", [&](std::ostream& o) { write_prune_csv(o, pr); });
  rep.artifacts["pruned_model"] = "pruned_model.json";
  rep.artifacts["prune_curve"] = "prune_curve.csv";

  // Everything downstream of pruning reads the artifact back from disk.
  rep.pruned_model_hash = file_hash(dir / "pruned_model.json");
  const Mlp pruned_on_disk = load_model(dir / "pruned_model.json").model;
  rep.pruned_val = accuracy(pruned_on_disk, data.val);
  rep.pruned_test = accuracy(pruned_on_disk, data.test);
  if (log) {
    *log << "[" << config.name << "] " << rep.combo << ": pruned step " << pr.selected_step << " ratio "
         << rep.compression_ratio << " test=" << rep.pruned_test << "\n";
  }

  rep.failed_stage = "quantize";
  QuantSweepConfig qc = config.quant;
  qc.loss_spec = g.config.spec;
  const Dataset& select = config.quant_select_on_test ? data.test : data.val;
  rep.quant_curve = bits_sweep(g.model, select, data.test, qc);
  rep.pruned_quant_curve = bits_sweep(pruned_on_disk, select, data.test, qc);
  if (auto r = rep.quant_curve.smallest_within_tolerance()) {
    rep.quant_bits = r->total_bits;
    rep.quant_frac_bits = r->frac_bits;
    rep.quant_test = r->accuracy;
  }
  if (auto r = rep.pruned_quant_curve.smallest_within_tolerance()) {
    rep.pruned_quant_bits = r->total_bits;
    rep.pruned_quant_frac_bits = r->frac_bits;
    rep.pruned_quant_test = r->accuracy;
    const Mlp pq = quantize_model(pruned_on_disk, {r->total_bits, r->frac_bits, qc.rounding});
    rep.quant_compression_ratio = quantized_compression_ratio(rep.nonzeros_before, pq.nonzero_weights(), r->total_bits);
  }
  write_csv_file(dir / "quant_unpruned.csv", [&](std::ostream& o) { write_quant_csv(o, rep.quant_curve); });
  write_csv_file(dir / "quant_pruned.csv", [&](std::ostream& o) { write_quant_csv(o, rep.pruned_quant_curve); });
  rep.artifacts["quant_unpruned"] = "quant_unpruned.csv";
  rep.artifacts["quant_pruned"] = "quant_pruned.csv";

  rep.failed_stage.clear();
  rep.ok = true;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const LoadedData data = load_data(config.data, config.standardize);

  std::vector<std::size_t> widths{data.train.n_features()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(data.train.n_classes());

  RunReport report;
  report.name = config.name;
  report.dataset = config.dataset_name();
  report.widths = widths;
  report.seed = config.seed;
  report.config_hash = config.hash();
  report.scaling = config.standardize ? "standardize(train mean/std)" : "none";
  report.normalization = std::string(to_string(config.train.normalization));
  report.quant_selection = config.quant_select_on_test ? "test" : "val";

  const fs::path root = config.out_dir / config.name;
  fs::create_directories(root);
  write_text(root / "config.txt", config.to_text());

  for (const auto& name : config.combos) {
    ComboReport rep;
    rep.combo = Combo::parse(name).name();
    try {
      run_combo(config, data, widths, root / combo_slug(rep.combo), rep, log);
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.error = e.what();
      if (log) *log << "[" << config.name << "] " << rep.combo << ": " << rep.failed_stage << " failed: " << e.what() << "\n";
    }
    report.combos.push_back(std::move(rep));
  }

  write_text(root / "report.json", report.to_json());
  const std::vector<RunReport> single{report};
  emit_tables(single, root);
  return report;
}

std::vector<fs::path> emit_tables(std::span<const RunReport> reports, const fs::path& out_dir) {
  if (reports.empty()) throw Error("no reports to tabulate");
  fs::create_directories(out_dir / "curves");
  std::vector<fs::path> written;

  std::vector<std::size_t> depths;
  for (const auto& r : reports) depths.push_back(r.depth());
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());

  for (std::size_t depth : depths) {
    std::vector<const RunReport*> rows;
    for (const auto& r : reports) {
      if (r.depth() == depth) rows.push_back(&r);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const RunReport* a, const RunReport* b) {
      return std::tie(a->dataset, a->name) < std::tie(b->dataset, b->name);
    });
    std::vector<std::string> combos;
    for (const auto* r : rows) {
      for (const auto& c : r->combos) {
        if (std::find(combos.begin(), combos.end(), c.combo) == combos.end()) combos.push_back(c.combo);
      }
    }
    auto find = [](const RunReport& r, const std::string& combo) -> const ComboReport* {
      for (const auto& c : r.combos) {
        if (c.combo == combo) return &c;
      }
      return nullptr;
    };
    auto cell = [](const ComboReport* c, double ComboReport::*field) {
      return c && c->ok ? format_number(c->*field) : std::string();
    };

    const std::string suffix = "fnn" + std::to_string(depth) + ".csv";
    {
      std::vector<std::string> header{"dataset"};
      for (const auto& c : combos) header.push_back("unpruned " + c);
      for (const auto& c : combos) header.push_back("pruned " + c);
      const fs::path path = out_dir / ("accuracy_" + suffix);
      write_csv_file(path, [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row(header);
        for (const auto* r : rows) {
          std::vector<std::string> line{r->dataset};
          for (const auto& c : combos) line.push_back(cell(find(*r, c), &ComboReport::unpruned_test));
          for (const auto& c : combos) line.push_back(cell(find(*r, c), &ComboReport::pruned_test));
          csv.row(line);
        }
      });
      written.push_back(path);
    }
    {
      std::vector<std::string> header{"dataset"};
      header.insert(header.end(), combos.begin(), combos.end());
      const fs::path path = out_dir / ("compression_" + suffix);
      write_csv_file(path, [&](std::ostream& o) {
        CsvWriter csv(o);
        csv.row(header);
        for (const auto* r : rows) {
          std::vector<std::string> line{r->dataset};
          for (const auto& c : combos) line.push_back(cell(find(*r, c), &ComboReport::compression_ratio));
          csv.row(line);
        }
      });
      written.push_back(path);
    }
    for (const auto* r : rows) {
      for (const auto& c : r->combos) {
        if (!c.ok) continue;
        const std::string stem = r->dataset + "_fnn" + std::to_string(depth) + "_" + combo_slug(c.combo);
        for (const auto& [tag, curve] : {std::pair{"unpruned", &c.quant_curve}, std::pair{"pruned", &c.pruned_quant_curve}}) {
          const fs::path path = out_dir / "curves" / (stem + "_" + tag + ".csv");
          write_csv_file(path, [&](std::ostream& o) { write_quant_csv(o, *curve); });
          written.push_back(path);
        }
      }
    }
  }
  return written;
}

}  // namespace lcnn
