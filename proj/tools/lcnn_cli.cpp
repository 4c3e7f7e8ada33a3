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

// lcnn: train, prune and quantize small hinge-loss MLPs from the command line.
//
//   lcnn train      --data tr,val,te --arch 50 --combo H+W1 --out run/
//   lcnn prune      --model run/model.json --data tr,val,te --out run/
//   lcnn quantize   --model run/pruned_model.json --data tr,val,te --out run/
//   lcnn experiment --config dna.cfg
//   lcnn report     --runs runs/ --out tables/
#include "lcnn/experiment.hpp"
#include "lcnn/model_io.hpp"
#include "lcnn/random.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace fs = std::filesystem;

namespace {

// Thrown with the pipeline stage that failed so main() can name it.
struct StageError : std::runtime_error {
  StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage(std::move(stage)) {}
  std::string stage;
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// Flags shared by every verb; each maps 1:1 onto an experiment config key.
struct CommonFlags {
  std::map<std::string, std::string> values;

  CLI::Option* add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    return app.add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  void apply(lcnn::ExperimentConfig& cfg) const {
    for (const auto& [k, v] : values) cfg.set(k, v);
  }
};

void add_data_flags(CLI::App& app, CommonFlags& f) {
  f.add(app, "--data", "data", "one LIBSVM file (split with --splits) or train,val,test files")->required();
  f.add(app, "--splits", "split", "train,val,test fractions for single-file data (default 0.8,0.1,0.1)");
  f.add(app, "--seed", "seed", "root seed for splits, init and shuffles");
  f.add(app, "--n-features", "n_features", "fixed feature count (default: widest file)");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_csv(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
}

lcnn::DataSource data_source(const lcnn::ExperimentConfig& cfg) {
  lcnn::DataSource src = cfg.data;
  src.split.seed = lcnn::derive_seed(cfg.seed, "data");
  return src;
}

// Loads the data and rescales it with the statistics stored next to the model.
lcnn::LoadedData data_for_model(const lcnn::ExperimentConfig& cfg, const lcnn::ModelFile& mf) {
  lcnn::LoadedData d = lcnn::load_data(data_source(cfg), false);
  if (mf.provenance.scaler) {
    for (lcnn::Dataset* s : {&d.train, &d.val, &d.test}) mf.provenance.scaler->apply_in_place(*s);
    d.scaler = mf.provenance.scaler;
  }
  if (d.train.n_features() != mf.model.input_width()) {
    throw lcnn::DimensionError("data has " + std::to_string(d.train.n_features()) + " features, model expects " +
                               std::to_string(mf.model.input_width()));
  }
  return d;
}

int cmd_train(const lcnn::ExperimentConfig& cfg, const std::string& combo_name, const fs::path& out) {
  const lcnn::Combo combo = stage("config", [&] { return lcnn::Combo::parse(combo_name); });
  stage("config", [&] {
    cfg.train.validate();
    return 0;
  });
  const lcnn::LoadedData data = stage("load", [&] { return lcnn::load_data(data_source(cfg), cfg.standardize); });

  std::vector<std::size_t> widths{data.train.n_features()};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(data.train.n_classes());

  return stage("train", [&] {
    lcnn::TrainConfig base = cfg.train;
    base.seed = lcnn::derive_seed(cfg.seed, "shuffle");
    lcnn::GridOptions opts;
    opts.init_seed = lcnn::derive_seed(cfg.seed, "init");
    opts.threads = cfg.threads;
    const lcnn::GridResult g = lcnn::grid_search(data.train, data.val, widths, combo, cfg.grid, base, opts);

    fs::create_directories(out);
    lcnn::Provenance prov;
    prov.train = g.config;
    prov.scaler = data.scaler;
    prov.notes = {{"combo", combo.name()}, {"seed", std::to_string(cfg.seed)}, {"stage", "trained"}};
    lcnn::save_model(out / "model.json", g.model, prov);
    write_csv(out / "history.csv", [&](std::ostream& o) { lcnn::write_history_csv(o, g.history); });
    write_csv(out / "grid.csv", [&](std::ostream& o) { lcnn::write_grid_csv(o, g.runs); });
    std::cout << combo.name() << " c=" << g.cell.c << " d=" << g.cell.d << " lr=" << g.cell.lr
              << " epoch=" << g.history.selected_epoch << " val=" << lcnn::accuracy(g.model, data.val)
              << " test=" << lcnn::accuracy(g.model, data.test) << "\n"
              << "wrote " << (out / "model.json").string() << "\n";
    return 0;
  });
}

int cmd_prune(const lcnn::ExperimentConfig& cfg, const fs::path& model_path, const fs::path& out) {
  const lcnn::ModelFile mf = stage("load", [&] { return lcnn::load_model(model_path); });
  const lcnn::LoadedData data = stage("load", [&] { return data_for_model(cfg, mf); });
  return stage("prune", [&] {
    const lcnn::PruneResult r = lcnn::sweep_and_select(mf.model, data.val, cfg.prune, &data.test);
    fs::create_directories(out);
    lcnn::Provenance prov = mf.provenance;
    prov.notes["stage"] = "pruned";
    prov.notes["parent_model_hash"] = lcnn::file_hash(model_path);
    prov.notes["prune_step"] = std::to_string(r.selected_step);
    lcnn::save_model(out / "pruned_model.json", r.pruned_model, prov);
    write_csv(out / "prune_curve.csv", [&](std::ostream& o) { lcnn::write_prune_csv(o, r); });
    std::cout << "step=" << r.selected_step << (r.tolerance_unmet ? " (tolerance unmet)" : "")
              << " nonzeros=" << r.pruned_model.nonzero_weights() << "/" << r.baseline_nonzeros
              << " ratio=" << r.ratio.ratio << " val=" << lcnn::accuracy(r.pruned_model, data.val)
              << " test=" << lcnn::accuracy(r.pruned_model, data.test) << "\n";
    return 0;
  });
}

int cmd_quantize(const lcnn::ExperimentConfig& cfg, const fs::path& model_path, const fs::path& out) {
  const lcnn::ModelFile mf = stage("load", [&] { return lcnn::load_model(model_path); });
  const lcnn::LoadedData data = stage("load", [&] { return data_for_model(cfg, mf); });
  return stage("quantize", [&] {
    lcnn::QuantSweepConfig qc = cfg.quant;
    if (mf.provenance.train) qc.loss_spec = mf.provenance.train->spec;
    const lcnn::QuantReport rep =
        lcnn::bits_sweep(mf.model, cfg.quant_select_on_test ? data.test : data.val, data.test, qc);
    fs::create_directories(out);
    const fs::path csv = out / (model_path.stem().string() + "_quant.csv");
    write_csv(csv, [&](std::ostream& o) { lcnn::write_quant_csv(o, rep); });
    std::cout << "full precision test=" << rep.full_precision.accuracy << "\n";
    if (auto best = rep.smallest_within_tolerance()) {
      std::cout << "smallest T within tolerance: T=" << best->total_bits << " F=" << best->frac_bits
                << " test=" << best->accuracy << "\n";
    } else {
      std::cout << "no bit width within tolerance\n";
    }
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
  });
}

int cmd_experiment(lcnn::ExperimentConfig cfg) {
  stage("config", [&] {
    cfg.validate();
    return 0;
  });
  const lcnn::RunReport r = lcnn::run_experiment(cfg, &std::cout);
  for (const auto& c : r.combos) {
    if (!c.ok) throw StageError(c.failed_stage, c.combo + ": " + c.error);
  }
  std::cout << "wrote " << (cfg.out_dir / cfg.name / "report.json").string() << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const fs::path& out) {
  std::vector<lcnn::RunReport> reports = stage("load", [&] {
    std::vector<lcnn::RunReport> rs;
    for (const auto& root : runs) {
      if (fs::is_regular_file(root)) {
        rs.push_back(lcnn::RunReport::load(root));
        continue;
      }
      if (!fs::is_directory(root)) throw std::runtime_error("no such run directory " + root);
      for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().filename() == "report.json") rs.push_back(lcnn::RunReport::load(e.path()));
      }
    }
    if (rs.empty()) throw std::runtime_error("no report.json found");
    return rs;
  });
  return stage("report", [&] {
    for (const auto& p : lcnn::emit_tables(reports, out)) std::cout << "wrote " << p.string() << "\n";
    return 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, prune and quantize small hinge-loss MLPs"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string combo = "H";
  std::string model_path;
  std::string out = "out";
  std::string config_path;
  std::vector<std::string> runs;

  auto* train = app.add_subcommand("train", "grid-search and train one regularizer combo");
  add_data_flags(*train, flags);
  flags.add(*train, "--arch", "arch", "hidden widths, e.g. 50 or 50,50 (none for linear)");
  train->add_option("--combo", combo, "regularizer combo, e.g. H+W1+LCL")->capture_default_str();
  flags.add(*train, "--grid-c", "grid_c", "C / l1 grid");
  flags.add(*train, "--grid-d", "grid_d", "D grid");
  flags.add(*train, "--grid-lr", "grid_lr", "initial learning-rate grid");
  flags.add(*train, "--epochs", "epochs", "epochs per grid cell");
  flags.add(*train, "--batch", "batch", "mini-batch size");
  flags.add(*train, "--normalization", "normalization", "mean or sum per-batch scaling");
  flags.add(*train, "--standardize", "standardize", "true/false: z-score features with train statistics");
  flags.add(*train, "--threads", "threads", "grid worker threads (0 = hardware)");
  train->add_option("--out", out, "output directory")->capture_default_str();

  auto* prune = app.add_subcommand("prune", "magnitude-prune a trained model");
  add_data_flags(*prune, flags);
  prune->add_option("--model", model_path, "model file")->required();
  flags.add(*prune, "--tolerance", "tolerance", "allowed validation accuracy drop");
  flags.add(*prune, "--t-min", "prune_t_min", "smallest threshold");
  flags.add(*prune, "--steps", "prune_steps", "threshold steps");
  prune->add_option("--out", out, "output directory")->capture_default_str();

  auto* quant = app.add_subcommand("quantize", "sweep fixed-point bit widths");
  add_data_flags(*quant, flags);
  quant->add_option("--model", model_path, "model file")->required();
  flags.add(*quant, "--tolerance", "tolerance", "allowed accuracy drop");
  flags.add(*quant, "--rounding", "quant_rounding", "toward_zero or nearest");
  flags.add(*quant, "--select", "quant_select", "choose F on val (default) or test");
  flags.add(*quant, "--min-bits", "quant_min_bits", "smallest total bits");
  flags.add(*quant, "--max-bits", "quant_max_bits", "largest total bits");
  quant->add_option("--out", out, "output directory")->capture_default_str();

  auto* exp = app.add_subcommand("experiment", "full train/prune/quantize pipeline from a config file");
  exp->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  flags.add(*exp, "--data", "data", "override data files");
  flags.add(*exp, "--splits", "split", "override split fractions");
  flags.add(*exp, "--arch", "arch", "override hidden widths");
  flags.add(*exp, "--combo", "combos", "override combos (comma separated)");
  flags.add(*exp, "--grid-c", "grid_c", "override C grid");
  flags.add(*exp, "--grid-d", "grid_d", "override D grid");
  flags.add(*exp, "--grid-lr", "grid_lr", "override learning-rate grid");
  flags.add(*exp, "--epochs", "epochs", "override epochs");
  flags.add(*exp, "--batch", "batch", "override batch size");
  flags.add(*exp, "--seed", "seed", "override seed");
  flags.add(*exp, "--tolerance", "tolerance", "override accuracy tolerance");
  flags.add(*exp, "--threads", "threads", "grid worker threads");
  flags.add(*exp, "--out", "out", "override output root");

  auto* report = app.add_subcommand("report", "collect report.json files into tables");
  report->add_option("--runs", runs, "run directories or report files")->required();
  report->add_option("--out", out, "table directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    lcnn::ExperimentConfig cfg;
    if (*exp) cfg = stage("config", [&] { return lcnn::ExperimentConfig::load(config_path); });
    stage("config", [&] {
      flags.apply(cfg);
      return 0;
    });
    if (*train) return cmd_train(cfg, combo, out);
    if (*prune) return cmd_prune(cfg, model_path, out);
    if (*quant) return cmd_quantize(cfg, model_path, out);
    if (*exp) return cmd_experiment(cfg);
    return cmd_report(runs, out);
  } catch (const StageError& e) {
    std::cerr << "lcnn: " << e.stage << " failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "lcnn: failed: " << e.what() << "\n";
    return 1;
  }
}
