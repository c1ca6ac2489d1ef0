/*
 * Copyright 2026 The tsxai Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "tsxai/experiment.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "tsxai/errors.h"

namespace tsxai::cli {
namespace {

namespace fs = std::filesystem;
using attribution::ExplainerConfig;
using attribution::Method;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / name;
  fs::remove_all(dir);
  return dir;
}

// Seconds-scale configuration exercising every stage.
ExperimentConfig TinyConfig(const fs::path& out) {
  ExperimentConfig c;
  c.seed = 77;
  c.fleet.n_units = 4;
  c.fleet.channels = 3;
  c.fleet.informative_channels = 2;
  c.fleet.life_min = 40;
  c.fleet.life_max = 50;
  c.window = 16;
  c.test_units = 1;
  TrainingConfig t;
  t.architecture.conv_filters = {4, 4};
  t.architecture.dense_units = {8};
  t.epochs = 2;
  t.learning_rate = 1e-3;
  c.training = t;
  ExplainerConfig e;
  c.explainers.push_back(e);  // saliency
  e.method = Method::kGradCam;
  e.layer_index = 1;
  c.explainers.push_back(e);
  e = ExplainerConfig{};
  e.method = Method::kLime;
  e.segments_per_channel = 2;
  e.neighborhood = 16;
  e.perturbation = segperturb::Perturbation::kNormalNoise;
  c.explainers.push_back(e);
  e.method = Method::kKernelShap;
  c.explainers.push_back(e);
  c.eval_samples = 6;
  c.beta_grid = {0.0, 0.5};
  c.sigma_grid = {0.0, 1.0};
  c.grid_samples = 3;
  c.sweep_samples = 4;
  c.emit_heatmaps = 1;
  c.out_dir = out.string();
  return c;
}

TEST(GridTest, RangesAndLists) {
  const std::vector<double> g = ParseGrid("0:1:0.1");
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g[3], 0.3, 1e-12);
  EXPECT_NEAR(g.back(), 1.0, 1e-12);
  EXPECT_EQ(ParseGrid("0.2,0.7"), (std::vector<double>{0.2, 0.7}));
  EXPECT_EQ(ParseGrid("0.5"), (std::vector<double>{0.5}));
  EXPECT_THROW(ParseGrid("0:1"), ConfigError);
  EXPECT_THROW(ParseGrid("a,b"), ConfigError);
  EXPECT_THROW(ParseGrid("0:1:0"), ConfigError);
  EXPECT_EQ(ParseIndexList("0,2"), (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(ParseIndexList("-1"), ConfigError);
}

TEST(DefaultsTest, ThirteenRows) {
  const auto rows = DefaultExplainers();
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0].Label(), "Saliency");
  EXPECT_EQ(rows[1].Label(), "LRP");
  EXPECT_EQ(rows[2].Label(), "Grad-CAM");
  std::set<std::string> lime, shap;
  for (std::size_t i = 3; i < 8; ++i) {
    EXPECT_EQ(rows[i].Label(), "LIME");
    lime.insert(rows[i].PerturbationLabel());
  }
  for (std::size_t i = 8; i < 13; ++i) {
    EXPECT_EQ(rows[i].Label(), "SHAP");
    shap.insert(rows[i].PerturbationLabel());
  }
  EXPECT_EQ(lime.size(), 5u);
  EXPECT_EQ(lime, shap);
  ExperimentConfig c;
  c.ApplyDefaults();
  EXPECT_EQ(c.beta_grid.size(), 11u);
  EXPECT_EQ(c.sigma_grid.size(), 11u);
  EXPECT_NO_THROW(c.Validate());
}

TEST(HashTest, Fnv1aReferenceValues) {
  EXPECT_EQ(Fnv1aHex(""), "cbf29ce484222325");
  EXPECT_EQ(Fnv1aHex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(Fnv1aHex("foobar"), "85944171f73967e8");
}

TEST(ConfigTest, JsonRoundTripAndHash) {
  ExperimentConfig c = TinyConfig("a");
  c.ApplyDefaults();
  const ExperimentConfig back = ExperimentConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  ExperimentConfig moved = c;
  moved.out_dir = "somewhere/else";
  EXPECT_EQ(ConfigHash(moved), ConfigHash(c));
  moved.seed += 1;
  EXPECT_NE(ConfigHash(moved), ConfigHash(c));
}

TEST(ConfigTest, RejectsBadDocuments) {
  nlohmann::json doc = TinyConfig("a").ToJson();
  doc["colour"] = "blue";
  EXPECT_THROW(ExperimentConfig::FromJson(doc), ConfigError);
  doc = TinyConfig("a").ToJson();
  doc["schema_version"] = 99;
  EXPECT_THROW(ExperimentConfig::FromJson(doc), ConfigError);
  doc = TinyConfig("a").ToJson();
  doc["model_path"] = "m.json";
  EXPECT_THROW(ExperimentConfig::FromJson(doc), ConfigError);
  ExperimentConfig c = TinyConfig("a");
  c.test_units = 4;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = TinyConfig("a");
  c.beta_grid = {1.5};
  EXPECT_THROW(c.Validate(), ConfigError);
  EXPECT_THROW(LoadConfig("/nonexistent/config.json"), ConfigError);
}

TEST(SeedsTest, DistinctAndDeterministic) {
  const StageSeeds a = DeriveStageSeeds(5), b = DeriveStageSeeds(5);
  EXPECT_EQ(a.ToJson(), b.ToJson());
  const std::set<std::uint64_t> all = {a.data, a.init, a.shuffle, a.selection,
                                       a.proxies};
  EXPECT_EQ(all.size(), 5u);
  EXPECT_NE(DeriveStageSeeds(6).data, a.data);
}

TEST(PrepareDataTest, HoldsOutLastUnits) {
  const ExperimentConfig c = TinyConfig("a");
  const PreparedData d = PrepareData(c);
  ASSERT_EQ(d.fleet.size(), 4u);
  for (const auto& s : d.train) EXPECT_LT(s.unit_id, 3);
  for (const auto& s : d.test) EXPECT_EQ(s.unit_id, 3);
  EXPECT_EQ(d.test.size(), d.fleet[3].steps() - 16);
  ASSERT_EQ(d.evaluation.size(), 6u);
  std::set<int> ends;
  for (const auto& s : d.evaluation) {
    EXPECT_EQ(s.unit_id, 3);
    ends.insert(s.t_end);
  }
  EXPECT_EQ(ends.size(), 6u);
  const std::vector<dataset::UnitHistory> train_units(d.fleet.begin(),
                                                      d.fleet.begin() + 3);
  EXPECT_EQ(d.normalization.ToJson(), dataset::ZScoreFit(train_units).ToJson());
  const PreparedData again = PrepareData(c);
  for (std::size_t i = 0; i < d.evaluation.size(); ++i) {
    EXPECT_EQ(again.evaluation[i].x, d.evaluation[i].x);
  }
}

TEST(PipelineTest, RerunFromManifestIsByteIdentical) {
  const fs::path first = FreshDir("tsxai_run_a");
  const fs::path second = FreshDir("tsxai_run_b");
  const RunSummary a = RunExperiment(TinyConfig(first));

  // Re-run from the written manifest, redirected to a new directory.
  ExperimentConfig replay = LoadConfig((first / "manifest.json").string());
  replay.out_dir = second.string();
  const RunSummary b = RunExperiment(replay);
  ASSERT_EQ(a.outputs, b.outputs);
  for (const std::string& rel : a.outputs) {
    EXPECT_EQ(ReadFile(first / rel), ReadFile(second / rel)) << rel;
  }
  EXPECT_EQ(a.manifest.at("config_hash"), b.manifest.at("config_hash"));

  // One row per method, one line per (layer, proxy), one per grid point.
  std::stringstream reports(ReadFile(first / "reports.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(reports, line)) ++rows;
  EXPECT_EQ(rows, 4);
  std::stringstream grid(ReadFile(first / "grid.csv"));
  rows = -1;
  while (std::getline(grid, line)) ++rows;
  EXPECT_EQ(rows, 4);
  std::stringstream sweep(ReadFile(first / "sweep.csv"));
  rows = -1;
  while (std::getline(sweep, line)) ++rows;
  EXPECT_EQ(rows, 2 * 7);

  const nlohmann::json& m = a.manifest;
  for (const char* key : {"tool", "version", "schema_version", "versions",
                          "config", "config_hash", "seeds", "normalization",
                          "test_units", "selected_samples", "outputs"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_EQ(m.at("selected_samples").size(), 6u);
  EXPECT_TRUE(fs::exists(first / "heatmaps"));
}

int RunMain(std::vector<std::string> args) {
  args.insert(args.begin(), "tsxai");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return Main(static_cast<int>(argv.size()), argv.data());
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(RunMain({"--help"}), 0);
  EXPECT_EQ(RunMain({}), 2);
  EXPECT_EQ(RunMain({"frobnicate"}), 2);
  EXPECT_EQ(RunMain({"run", "--config", "/nonexistent.json"}), 2);
  EXPECT_EQ(RunMain({"grid", "--beta-grid", "0:2:0.5"}), 2);
  EXPECT_EQ(RunMain({"run", "--methods", "occlusion"}), 2);

  const fs::path dir = FreshDir("tsxai_cli");
  fs::create_directories(dir);
  {
    std::ofstream bad(dir / "model.json");
    bad << "{\"not\": \"a model\"}";
  }
  EXPECT_EQ(RunMain({"evaluate", "--model", (dir / "model.json").string(),
                     "--out-dir", dir.string()}),
            3);
}

TEST(CliTest, GenerateAndEvaluateWithConfigFile) {
  const fs::path dir = FreshDir("tsxai_cli_cfg");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json");
    cfg << TinyConfig(dir / "out").ToJson().dump(2);
  }
  const std::string cfg = (dir / "config.json").string();
  EXPECT_EQ(RunMain({"generate", "--config", cfg}), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "fleet"));
  EXPECT_TRUE(fs::exists(dir / "out" / "evaluation.bin"));
  EXPECT_EQ(dataset::ReadSampleCache((dir / "out" / "evaluation.bin").string())
                .size(),
            6u);
  EXPECT_EQ(RunMain({"train", "--config", cfg, "--epochs", "1"}), 0);
  ASSERT_TRUE(fs::exists(dir / "out" / "model.json"));
  const std::string model = (dir / "out" / "model.json").string();
  EXPECT_EQ(RunMain({"evaluate", "--config", cfg, "--model", model,
                     "--methods", "saliency,gradcam", "--out-dir",
                     (dir / "eval").string()}),
            0);
  std::stringstream reports(ReadFile(dir / "eval" / "reports.csv"));
  std::string line;
  std::getline(reports, line);
  std::getline(reports, line);
  EXPECT_EQ(line.rfind("Saliency,-,1.000000,", 0), 0u) << line;
}

}  // namespace
}  // namespace tsxai::cli
