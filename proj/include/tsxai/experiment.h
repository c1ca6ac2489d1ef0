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

// Experiment orchestration behind the tsxai command line: data generation,
// training, explanation, proxy evaluation, the per-layer Grad-CAM sweep and
// the (beta, sigma) grid, with a manifest for reproducible re-runs.

#ifndef TSXAI_EXPERIMENT_H_
#define TSXAI_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsxai/attribution.h"
#include "tsxai/dataset.h"
#include "tsxai/model.h"
#include "tsxai/proxies.h"

namespace tsxai::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr char kVersion[] = "0.1.0";

struct TrainingConfig {
  tsmodel::ConvNetArchitecture architecture;
  std::size_t epochs = 12;
  double learning_rate = 2e-5;
  std::size_t batch_size = 32;

  nlohmann::json ToJson() const;
  static TrainingConfig FromJson(const nlohmann::json& doc);
};

struct ExperimentConfig {
  std::uint64_t seed = 2024;

  dataset::FleetConfig fleet;
  int window = 64;
  int test_units = 3;

  // Exactly one source of the model: a file or training hyper-parameters.
  std::string model_path;
  std::optional<TrainingConfig> training = TrainingConfig{};

  std::vector<attribution::ExplainerConfig> explainers;
  proxies::ProxyOptions proxy;
  std::size_t eval_samples = 128;

  std::vector<double> beta_grid;   // default 0, 0.1, ..., 1
  std::vector<double> sigma_grid;  // default 0, 0.1, ..., 1
  std::size_t grid_layer = 1;
  std::size_t grid_samples = 16;
  std::vector<std::size_t> sweep_layers;  // empty: every conv layer
  std::size_t sweep_samples = 64;

  std::size_t emit_heatmaps = 4;
  std::string out_dir = "tsxai_out";

  // Fills the explainer list and grids with the defaults when empty.
  void ApplyDefaults();
  // Throws ConfigError.
  void Validate() const;
  nlohmann::json ToJson() const;
  // Accepts a config document or a manifest (its "config" member).
  static ExperimentConfig FromJson(const nlohmann::json& doc);
};

// The thirteen default method rows: saliency, LRP, Grad-CAM, LIME and
// Kernel SHAP under each of the five perturbations.
std::vector<attribution::ExplainerConfig> DefaultExplainers();

// start, start + step, ... up to and including stop (within step / 2).
std::vector<double> MakeGrid(double start, double stop, double step);
// "start:stop:step" or a comma-separated list.
std::vector<double> ParseGrid(const std::string& text);
std::vector<std::size_t> ParseIndexList(const std::string& text);

ExperimentConfig LoadConfig(const std::string& path);

// 64-bit FNV-1a over the bytes of `text`, as 16 lower-case hex digits.
std::string Fnv1aHex(const std::string& text);
// Hash of the configuration with the output directory removed.
std::string ConfigHash(const ExperimentConfig& config);

// Seeds derived from the master seed, one per pipeline stage.
struct StageSeeds {
  std::uint64_t data = 0;
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
  std::uint64_t selection = 0;
  std::uint64_t proxies = 0;

  nlohmann::json ToJson() const;
};
StageSeeds DeriveStageSeeds(std::uint64_t master);

struct PreparedData {
  std::vector<dataset::UnitHistory> fleet;  // raw
  dataset::NormalizationStats normalization;
  std::vector<dataset::Sample> train;
  std::vector<dataset::Sample> test;        // all held-out windows
  std::vector<dataset::Sample> evaluation;  // selected subset of test
};

// Generates the fleet, holds out the last `test_units` units, fits the
// z-score on the training units and selects the evaluation windows by a
// seeded shuffle of the held-out windows.
PreparedData PrepareData(const ExperimentConfig& config);

struct TrainedModel {
  tsmodel::Model model;
  std::vector<double> epoch_loss;
  double test_rmse = 0.0;
  double test_nasa = 0.0;
};

// Loads config.model_path or trains a fresh network.
TrainedModel ObtainModel(const ExperimentConfig& config,
                         const PreparedData& data);

std::vector<Matrix> Inputs(const std::vector<dataset::Sample>& samples);

std::vector<proxies::ProxyReport> EvaluateMethods(
    const ExperimentConfig& config, const tsmodel::Model& model,
    const PreparedData& data);

struct LayerReport {
  std::size_t layer = 0;
  proxies::ProxyReport report;
};
// Grad-CAM at every sweep layer (identity omitted).
std::vector<LayerReport> SweepLayers(const ExperimentConfig& config,
                                     const tsmodel::Model& model,
                                     const PreparedData& data);

struct GridPoint {
  double beta = 0.0;
  double sigma = 0.0;
  proxies::ProxyReport report;
};
std::vector<GridPoint> GridSearch(const ExperimentConfig& config,
                                  const tsmodel::Model& model,
                                  const PreparedData& data);

// Long form: layer,proxy,score.
void WriteSweepCsv(const std::vector<LayerReport>& sweep,
                   const std::string& path);
// beta,sigma,Sep,Sta,Sel,Coh,Comp,Cong,Acu.
void WriteGridCsv(const std::vector<GridPoint>& grid, const std::string& path);

// Writes maps for the first config.emit_heatmaps evaluation samples under
// <out>/heatmaps; returns the written paths relative to out_dir.
std::vector<std::string> EmitHeatmaps(const ExperimentConfig& config,
                                      const tsmodel::Model& model,
                                      const PreparedData& data);

struct RunSummary {
  std::vector<std::string> outputs;  // relative to out_dir
  nlohmann::json manifest;
};

// Full pipeline; writes reports.csv/json, sweep.csv, grid.csv, heat maps,
// model.json and manifest.json into config.out_dir.
RunSummary RunExperiment(const ExperimentConfig& config);

nlohmann::json BuildManifest(const ExperimentConfig& config,
                             const PreparedData& data,
                             const std::vector<std::string>& outputs);

// Entry point of the command line tool; returns the process exit code
// (0 success, 2 configuration error, 3 runtime error).
int Main(int argc, char** argv);

}  // namespace tsxai::cli

#endif  // TSXAI_EXPERIMENT_H_
