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
#include "lcnn/model_io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lcnn {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small three-class problem written to disk as train/val/test files.
class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("lcnn_experiment_test_" +
                                        std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    Rng rng(10);
    const char* names[] = {"toy.tr", "toy.val", "toy.t"};
    for (const char* name : names) {
      Dataset d = testing::random_dataset(60, 4, 3, rng);
      for (std::size_t i = 0; i < d.size(); ++i) {
        d.features(static_cast<Eigen::Index>(i), d.labels[i]) += 2.0;  // make the classes learnable
      }
      std::ofstream(dir_ / name) << to_libsvm(d);
    }
  }

  ExperimentConfig config() const {
    ExperimentConfig c = ExperimentConfig::parse(
        "name = toy\n"
        "data = " + (dir_ / "toy.tr").string() + "," + (dir_ / "toy.val").string() + "," + (dir_ / "toy.t").string() +
        "\n"
        "arch = 5\n"
        "combos = H, H+W1+LCL\n"
        "grid_c = 1e-3\n"
        "grid_d = 1e-4\n"
        "grid_lr = 0.01, 0.1\n"
        "epochs = 5\n"
        "quant_min_bits = 12\n"
        "out = " + (dir_ / "runs").string() + "\n");
    return c;
  }

  fs::path dir_;
};

TEST_F(ExperimentTest, ParsesConfigText) {
  const ExperimentConfig c = config();
  EXPECT_EQ(c.name, "toy");
  EXPECT_EQ(c.data.files.size(), 3u);
  EXPECT_EQ(c.hidden, std::vector<std::size_t>{5});
  EXPECT_EQ(c.combos, (std::vector<std::string>{"H", "H+W1+LCL"}));
  EXPECT_EQ(c.grid.lr_values, (std::vector<double>{0.01, 0.1}));
  EXPECT_EQ(c.train.epochs, 5u);
  EXPECT_EQ(c.dataset_name(), "toy");
  EXPECT_NO_THROW(c.validate());
  // to_text is a faithful serialization.
  EXPECT_EQ(ExperimentConfig::parse(c.to_text()).hash(), c.hash());
  ExperimentConfig moved = c;
  moved.out_dir = "elsewhere";
  moved.threads = 3;
  EXPECT_EQ(moved.hash(), c.hash());
  moved.seed = 2;
  EXPECT_NE(moved.hash(), c.hash());
}

TEST_F(ExperimentTest, ConfigErrors) {
  EXPECT_THROW(ExperimentConfig::parse("nonsense\n"), Error);
  EXPECT_THROW(ExperimentConfig::parse("colour = red\n"), Error);
  EXPECT_THROW(ExperimentConfig::parse("epochs = many\n"), Error);
  EXPECT_THROW(ExperimentConfig::parse("split = 0.5,0.5\n"), Error);
  EXPECT_THROW(ExperimentConfig::parse("quant_select = train\n"), Error);
  ExperimentConfig c = config();
  c.combos = {"H+BN"};
  EXPECT_THROW(c.validate(), Error);
}

TEST_F(ExperimentTest, MissingDatasetFailsBeforeTraining) {
  ExperimentConfig c = config();
  c.data.files[2] = dir_ / "nope";
  EXPECT_THROW(run_experiment(c), Error);
  EXPECT_FALSE(fs::exists(dir_ / "runs" / "toy"));
}

TEST_F(ExperimentTest, HingeOnlyComboCollapsesToLearningRates) {
  ExperimentConfig c = config();
  c.combos = {"H"};
  c.grid = {{0.0}, {0.0}, {0.01, 0.1}};
  const RunReport r = run_experiment(c);
  ASSERT_EQ(r.combos.size(), 1u);
  EXPECT_TRUE(r.combos[0].ok);
  EXPECT_EQ(r.combos[0].grid_runs, 2u);
}

TEST_F(ExperimentTest, FullPipelineArtifactsAndDeterminism) {
  const ExperimentConfig c = config();
  const RunReport r = run_experiment(c);
  ASSERT_TRUE(r.all_ok()) << r.combos[0].error << r.combos[1].error;
  EXPECT_EQ(r.widths, (std::vector<std::size_t>{4, 5, 3}));
  EXPECT_EQ(r.depth(), 1u);
  const fs::path root = dir_ / "runs" / "toy";
  for (const auto& combo : r.combos) {
    const fs::path cdir = root / combo_slug(combo.combo);
    for (const auto& [kind, file] : combo.artifacts) EXPECT_TRUE(fs::exists(cdir / file)) << kind;
    EXPECT_EQ(file_hash(cdir / "pruned_model.json"), combo.pruned_model_hash);
    EXPECT_EQ(combo.quant_curve.rows.size(), 5u);  // T = 16..12
    EXPECT_GE(combo.compression_ratio, 1.0);
  }
  EXPECT_TRUE(fs::exists(root / "accuracy_fnn1.csv"));

  std::map<fs::path, std::string> first;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().extension() == ".csv") first[e.path()] = slurp(e.path());
  }
  run_experiment(c);
  for (const auto& [p, text] : first) EXPECT_EQ(slurp(p), text) << p;

  const RunReport back = RunReport::load(root / "report.json");
  EXPECT_EQ(back.to_json(), r.to_json());
}

TEST_F(ExperimentTest, StageFailureIsRecorded) {
  ExperimentConfig c = config();
  c.combos = {"H+LCL"};
  c.grid = {{0.0}, {1e300}, {1e300}};
  const RunReport r = run_experiment(c);
  ASSERT_EQ(r.combos.size(), 1u);
  EXPECT_FALSE(r.combos[0].ok);
  EXPECT_EQ(r.combos[0].failed_stage, "train");
  EXPECT_FALSE(r.combos[0].error.empty());
  EXPECT_TRUE(fs::exists(dir_ / "runs" / "toy" / "report.json"));
}

TEST(EmitTables, OneRowPerReport) {
  RunReport a;
  a.name = "a";
  a.dataset = "alpha";
  a.widths = {3, 4, 2};
  ComboReport c;
  c.combo = "H+W1";
  c.ok = true;
  c.unpruned_test = 0.9;
  c.pruned_test = 0.85;
  c.compression_ratio = 12.5;
  a.combos = {c};
  RunReport b = a;
  b.name = "b";
  b.dataset = "beta";
  b.combos[0].combo = "H";
  const auto dir = fs::temp_directory_path() / "lcnn_emit_tables";
  fs::remove_all(dir);
  const std::vector<RunReport> reports = {a, b};
  const auto paths = emit_tables(reports, dir);
  EXPECT_GE(paths.size(), 2u);
  const std::string acc = slurp(dir / "accuracy_fnn1.csv");
  EXPECT_EQ(acc,
            "dataset,unpruned H+W1,unpruned H,pruned H+W1,pruned H\r\n"
            "alpha,0.9,,0.85,\r\n"
            "beta,,0.9,,0.85\r\n");
  EXPECT_EQ(slurp(dir / "compression_fnn1.csv"), "dataset,H+W1,H\r\nalpha,12.5,\r\nbeta,,12.5\r\n");
  EXPECT_THROW(emit_tables(std::vector<RunReport>{}, dir), Error);
}

}  // namespace
}  // namespace lcnn
