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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsxai/errors.h"
#include "tsxai/experiment.h"

namespace tsxai::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Command-line overrides; unset members leave the config file value alone.
struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> model;
  std::optional<std::size_t> eval_samples;
  std::optional<std::size_t> group_size;
  std::optional<std::string> beta_grid;
  std::optional<std::string> sigma_grid;
  std::optional<std::size_t> grid_layer;
  std::optional<std::size_t> grid_samples;
  std::optional<std::string> layers;
  std::optional<std::size_t> emit_heatmaps;
  std::optional<std::size_t> epochs;
  std::optional<std::string> methods;
  bool abs_importance = false;
};

void AddCommonFlags(CLI::App* cmd, Flags* f) {
  cmd->add_option("-c,--config", f->config_path,
                  "JSON experiment config or manifest");
  cmd->add_option("--seed", f->seed, "Master seed");
  cmd->add_option("-o,--out-dir", f->out_dir, "Output directory");
  cmd->add_option("--model", f->model, "Use a saved model instead of training");
  cmd->add_option("--n-eval", f->eval_samples, "Evaluation samples");
  cmd->add_option("--group-size", f->group_size, "Selectivity group size");
  cmd->add_option("--beta-grid", f->beta_grid,
                  "Beta values: start:stop:step or a comma list");
  cmd->add_option("--sigma-grid", f->sigma_grid,
                  "Sigma values: start:stop:step or a comma list");
  cmd->add_option("--grid-layer", f->grid_layer, "Layer for the grid search");
  cmd->add_option("--grid-samples", f->grid_samples, "Samples per grid point");
  cmd->add_option("--layers", f->layers, "Comma list of conv layers to sweep");
  cmd->add_option("--emit-heatmaps", f->emit_heatmaps,
                  "Heat maps for the first N samples");
  cmd->add_option("--epochs", f->epochs, "Training epochs");
  cmd->add_option("--methods", f->methods,
                  "Comma list of methods to keep (saliency,lrp,gradcam,lime,shap)");
  cmd->add_flag("--abs-importance", f->abs_importance,
                "Rank absolute attribution values");
}

ExperimentConfig ResolveConfig(const Flags& f) {
  ExperimentConfig c =
      f.config_path.empty() ? ExperimentConfig{} : LoadConfig(f.config_path);
  c.ApplyDefaults();
  if (f.seed) c.seed = *f.seed;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.model) {
    c.model_path = *f.model;
    c.training.reset();
  }
  if (f.eval_samples) c.eval_samples = *f.eval_samples;
  if (f.group_size) c.proxy.group_size = *f.group_size;
  if (f.beta_grid) c.beta_grid = ParseGrid(*f.beta_grid);
  if (f.sigma_grid) c.sigma_grid = ParseGrid(*f.sigma_grid);
  if (f.grid_layer) c.grid_layer = *f.grid_layer;
  if (f.grid_samples) c.grid_samples = *f.grid_samples;
  if (f.layers) c.sweep_layers = ParseIndexList(*f.layers);
  if (f.emit_heatmaps) c.emit_heatmaps = *f.emit_heatmaps;
  if (f.epochs) {
    if (!c.training) throw ConfigError("--epochs conflicts with a model file");
    c.training->epochs = *f.epochs;
  }
  if (f.abs_importance) c.proxy.abs_importance = true;
  if (f.methods) {
    std::set<attribution::Method> keep;
    std::stringstream ss(*f.methods);
    std::string item;
    while (std::getline(ss, item, ',')) keep.insert(attribution::ParseMethod(item));
    std::vector<attribution::ExplainerConfig> filtered;
    for (const auto& e : c.explainers) {
      if (keep.count(e.method)) filtered.push_back(e);
    }
    c.explainers = std::move(filtered);
    if (c.explainers.empty()) throw ConfigError("--methods removed every method");
  }
  c.Validate();
  return c;
}

void WriteJson(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

int Generate(const ExperimentConfig& c) {
  const fs::path out = c.out_dir;
  fs::create_directories(out);
  const PreparedData data = PrepareData(c);
  dataset::WriteFleet((out / "fleet").string(), data.fleet, c.fleet,
                      DeriveStageSeeds(c.seed).data);
  WriteJson(out / "normalization.json", data.normalization.ToJson());
  dataset::WriteSampleCache((out / "train.bin").string(), data.train);
  dataset::WriteSampleCache((out / "evaluation.bin").string(), data.evaluation);
  WriteJson(out / "manifest.json", BuildManifest(c, data,
                                                 {"fleet", "normalization.json",
                                                  "train.bin", "evaluation.bin"}));
  std::cout << "generated " << data.fleet.size() << " units, "
            << data.train.size() << " training windows, "
            << data.evaluation.size() << " evaluation samples in " << out.string()
            << '\n';
  return 0;
}

int Train(const ExperimentConfig& c) {
  const fs::path out = c.out_dir;
  fs::create_directories(out);
  const PreparedData data = PrepareData(c);
  const TrainedModel m = ObtainModel(c, data);
  tsmodel::SaveModel(m.model, (out / "model.json").string());
  WriteJson(out / "training.json",
            {{"parameters", tsmodel::ParameterCount(m.model)},
             {"epoch_loss", m.epoch_loss},
             {"test_rmse", m.test_rmse},
             {"test_nasa", m.test_nasa}});
  std::cout << "model: " << tsmodel::ParameterCount(m.model)
            << " parameters, test RMSE " << m.test_rmse << ", NASA score "
            << m.test_nasa << '\n';
  return 0;
}

int Explain(ExperimentConfig c) {
  fs::create_directories(c.out_dir);
  if (c.emit_heatmaps == 0) c.emit_heatmaps = 4;
  const PreparedData data = PrepareData(c);
  const TrainedModel m = ObtainModel(c, data);
  const std::vector<std::string> files = EmitHeatmaps(c, m.model, data);
  std::cout << "wrote " << files.size() << " map files under "
            << (fs::path(c.out_dir) / "heatmaps").string() << '\n';
  return 0;
}

int Evaluate(const ExperimentConfig& c) {
  const fs::path out = c.out_dir;
  fs::create_directories(out);
  const PreparedData data = PrepareData(c);
  const TrainedModel m = ObtainModel(c, data);
  const auto reports = EvaluateMethods(c, m.model, data);
  proxies::WriteReportsCsv(reports, (out / "reports.csv").string());
  proxies::WriteReportsJson(reports, (out / "reports.json").string());
  std::cout << proxies::ReportCsvHeader() << '\n';
  for (const auto& r : reports) std::cout << proxies::ReportCsvRow(r) << '\n';
  return 0;
}

int Sweep(const ExperimentConfig& c) {
  const fs::path out = c.out_dir;
  fs::create_directories(out);
  const PreparedData data = PrepareData(c);
  const TrainedModel m = ObtainModel(c, data);
  WriteSweepCsv(SweepLayers(c, m.model, data), (out / "sweep.csv").string());
  std::cout << "wrote " << (out / "sweep.csv").string() << '\n';
  return 0;
}

int Grid(const ExperimentConfig& c) {
  const fs::path out = c.out_dir;
  fs::create_directories(out);
  const PreparedData data = PrepareData(c);
  const TrainedModel m = ObtainModel(c, data);
  const auto grid = GridSearch(c, m.model, data);
  WriteGridCsv(grid, (out / "grid.csv").string());
  std::cout << "wrote " << grid.size() << " grid points to "
            << (out / "grid.csv").string() << '\n';
  return 0;
}

int Run(const ExperimentConfig& c) {
  const RunSummary s = RunExperiment(c);
  std::cout << "wrote " << s.outputs.size() << " files and manifest.json to "
            << c.out_dir << '\n';
  return 0;
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"tsxai: explanation methods and quality proxies for "
               "time-series regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const ExperimentConfig&);
  };
  const Command commands[] = {
      {"generate", "Generate the synthetic fleet and sample caches", &Generate},
      {"train", "Train (or load) the regression network", &Train},
      {"explain", "Write attribution maps for the first samples",
       [](const ExperimentConfig& c) { return Explain(c); }},
      {"evaluate", "Proxy table for every configured method", &Evaluate},
      {"sweep", "Grad-CAM proxies per conv layer", &Sweep},
      {"grid", "Grad-CAM proxies over the (beta, sigma) grid", &Grid},
      {"run", "Full pipeline with manifest", &Run},
  };
  Flags flags;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    AddCommonFlags(sub, &flags);
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const ExperimentConfig config = ResolveConfig(flags);
    for (const auto& [sub, cmd] : subs) {
      if (sub->parsed()) return cmd->fn(config);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace tsxai::cli
