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

#include "lcnn/trainer.hpp"

#include "lcnn/csv.hpp"
#include "lcnn/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

namespace lcnn {

std::string_view to_string(SampleNormalization n) { return n == SampleNormalization::sum ? "sum" : "mean"; }

SampleNormalization parse_normalization(std::string_view s) {
  if (s == "sum") return SampleNormalization::sum;
  if (s == "mean") return SampleNormalization::mean;
  throw Error("unknown normalization '" + std::string(s) + "' (expected sum or mean)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 1) throw Error("batch size must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw Error("learning rate must be positive");
  spec.validate();
}

double TrainConfig::sample_scale(std::size_t n_train, std::size_t batch) const {
  const auto b = static_cast<double>(batch);
  return normalization == SampleNormalization::sum ? static_cast<double>(n_train) / b : 1.0 / b;
}

double TrainHistory::selected_val_accuracy() const {
  if (selected_epoch == 0 || selected_epoch > epochs.size()) return 0.0;
  return epochs[selected_epoch - 1].val_accuracy;
}

double lr_at_epoch(double lr0, std::size_t epoch) {
  if (epoch < 1) throw Error("epochs are 1-based");
  return lr0 / static_cast<double>(epoch);
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n_samples) {
  Rng rng(derive_seed(seed, "shuffle:" + std::to_string(epoch)));
  return permutation(n_samples, rng);
}

TrainResult train(Mlp model, const Dataset& train_set, const Dataset& val, const TrainConfig& config) {
  config.validate();
  model.validate();
  if (train_set.empty() || val.empty()) throw Error("training and validation sets must be nonempty");
  for (const Dataset* d : {&train_set, &val}) {
    if (d->n_features() != model.input_width()) throw DimensionError("data width does not match model input");
    if (d->n_classes() > model.n_classes()) throw DimensionError("data has more classes than the model");
  }

  const std::size_t m = train_set.size();
  const double full_scale = config.normalization == SampleNormalization::sum ? 1.0 : 1.0 / static_cast<double>(m);

  TrainResult result;
  result.history.epochs.reserve(config.epochs);
  Mlp best;
  double best_val = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config.lr0, epoch);
    const auto order = epoch_order(config.seed, epoch, m);
    for (std::size_t start = 0; start < m; start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, m - start);
      const Dataset batch = train_set.subset(std::span<const std::size_t>(order).subspan(start, len));
      const GradientResult g = gradients(model, batch, config.spec, config.sample_scale(m, len));
      if (!std::isfinite(g.loss.total)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + " (lr0=" +
                              std::to_string(config.lr0) + "); learning rate or D too large");
      }
      for (std::size_t k = 0; k < model.n_layers(); ++k) {
        Layer& l = model.layer(k);
        l.weights.noalias() -= lr * g.grads.weights[k];
        l.biases.noalias() -= lr * g.grads.biases[k];
        l.apply_mask();
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.loss = full_objective(model, train_set, config.spec, full_scale);
    if (!std::isfinite(rec.loss.total)) {
      throw DivergenceError("non-finite loss after epoch " + std::to_string(epoch) + " (lr0=" +
                            std::to_string(config.lr0) + ")");
    }
    rec.train_accuracy = accuracy(model, train_set);
    rec.val_accuracy = accuracy(model, val);
    result.history.epochs.push_back(rec);
    if (config.keep_best && rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      best = model;
      result.history.selected_epoch = epoch;
    }
  }

  if (config.keep_best) {
    result.model = std::move(best);
  } else {
    result.model = std::move(model);
    result.history.selected_epoch = config.epochs;
  }
  return result;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  CsvWriter csv(out);
  csv.row({"epoch", "lr", "hinge", "l2", "l1", "data_dep", "total", "train_acc", "val_acc"});
  for (const auto& e : history.epochs) {
    csv.row({format_number(static_cast<double>(e.epoch)), format_number(e.lr), format_number(e.loss.hinge),
             format_number(e.loss.l2_term), format_number(e.loss.l1_term), format_number(e.loss.data_dep_term),
             format_number(e.loss.total), format_number(e.train_accuracy), format_number(e.val_accuracy)});
  }
}

Combo Combo::parse(std::string_view name) {
  Combo c;
  bool saw_h = false;
  std::size_t pos = 0;
  while (pos <= name.size()) {
    std::size_t plus = name.find('+', pos);
    if (plus == std::string_view::npos) plus = name.size();
    std::string_view tok = name.substr(pos, plus - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok == "H") {
      saw_h = true;
    } else if (tok == "W2" || tok == "W") {
      c.l2 = true;
    } else if (tok == "W1") {
      c.l1 = true;
    } else if (tok == "LCA" || tok == "LCL") {
      if (c.scope != Scope::none) throw Error("combo '" + std::string(name) + "' names two data-dependent scopes");
      c.scope = tok == "LCA" ? Scope::all_layers : Scope::last_layer;
    } else if (tok == "D" || tok == "BN") {
      throw Error("dropout and batch normalization are not supported (combo '" + std::string(name) + "')");
    } else {
      throw Error("unknown combo term '" + std::string(tok) + "' in '" + std::string(name) + "'");
    }
    pos = plus + 1;
  }
  if (!saw_h) throw Error("combo '" + std::string(name) + "' must include the hinge loss H");
  if (c.l1 && c.l2) throw Error("combo '" + std::string(name) + "' mixes W1 and W2");
  return c;
}

std::string Combo::name() const {
  std::string s = "H";
  if (l2) s += "+W2";
  if (l1) s += "+W1";
  if (scope == Scope::all_layers) s += "+LCA";
  if (scope == Scope::last_layer) s += "+LCL";
  return s;
}

RegularizerSpec Combo::make_spec(double c, double d) const {
  RegularizerSpec s;
  s.C = l2 ? c : 0.0;
  s.l1 = l1 ? c : 0.0;
  s.scope = scope;
  s.D = uses_d() ? d : 0.0;
  return s;
}

GridSpec GridSpec::defaults() {
  return GridSpec{{1e-4, 1e-3, 1e-2, 1e-1}, {1e-8, 1e-7, 1e-6, 1e-5, 1e-4}, {1e-2, 1e-1}};
}

std::vector<GridCell> expand_grid(const Combo& combo, const GridSpec& grid) {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto cs = combo.uses_c() ? sorted(grid.c_values) : std::vector<double>{0.0};
  const auto ds = combo.uses_d() ? sorted(grid.d_values) : std::vector<double>{0.0};
  const auto lrs = sorted(grid.lr_values);
  if (cs.empty() || ds.empty() || lrs.empty()) throw Error("grid search needs nonempty grids");
  std::vector<GridCell> cells;
  for (double c : cs) {
    for (double d : ds) {
      for (double lr : lrs) cells.push_back({c, d, lr});
    }
  }
  return cells;
}

GridResult grid_search(const Dataset& train_set, const Dataset& val, std::span<const std::size_t> widths,
                       const Combo& combo, const GridSpec& grid, const TrainConfig& base,
                       const GridOptions& options) {
  const auto cells = expand_grid(combo, grid);
  const Mlp init = init_mlp(widths, options.init_seed);

  std::vector<GridRun> runs(cells.size());
  std::vector<std::optional<TrainResult>> results(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      TrainConfig cfg = base;
      cfg.lr0 = cells[i].lr;
      cfg.spec = combo.make_spec(cells[i].c, cells[i].d);
      runs[i].cell = cells[i];
      try {
        results[i] = train(init, train_set, val, cfg);
        runs[i].val_accuracy = results[i]->history.selected_val_accuracy();
        runs[i].selected_epoch = results[i]->history.selected_epoch;
      } catch (const DivergenceError& e) {
        runs[i].diverged = true;
        runs[i].error = e.what();
      }
    }
  };
  std::size_t n_threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  n_threads = std::clamp<std::size_t>(n_threads, 1, cells.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (runs[i].diverged) continue;
    if (!best || runs[i].val_accuracy > runs[*best].val_accuracy) best = i;
  }
  if (!best) throw DivergenceError("every grid cell diverged for combo " + combo.name());

  GridResult out;
  out.cell = cells[*best];
  out.config = base;
  out.config.lr0 = out.cell.lr;
  out.config.spec = combo.make_spec(out.cell.c, out.cell.d);
  out.model = std::move(results[*best]->model);
  out.history = std::move(results[*best]->history);
  out.runs = std::move(runs);
  return out;
}

void write_grid_csv(std::ostream& out, std::span<const GridRun> runs) {
  CsvWriter csv(out);
  csv.row({"c", "d", "lr", "val_acc", "selected_epoch", "diverged"});
  for (const auto& r : runs) {
    csv.row({format_number(r.cell.c), format_number(r.cell.d), format_number(r.cell.lr),
             format_number(r.val_accuracy), std::to_string(r.selected_epoch), r.diverged ? "1" : "0"});
  }
}

}  // namespace lcnn
