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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsxai/errors.h"
#include "tsxai/random.h"
#include "tsxai/segperturb.h"

namespace tsxai::cli {

namespace fs = std::filesystem;
using attribution::ExplainerConfig;
using attribution::Method;
using nlohmann::json;
using segperturb::Perturbation;

namespace {

constexpr std::uint64_t kStageStream = 0x5EED;
enum StagePurpose : std::uint64_t {
  kData = 1,
  kInit = 2,
  kShuffle = 3,
  kSelection = 4,
  kProxies = 5,
};

std::string FormatNumber(double v, const char* fmt = "%.6f") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, v == 0.0 ? 0.0 : v);
  return buf;
}

std::string Cell(const std::optional<double>& v) {
  return v ? FormatNumber(*v) : std::string();
}

json ArchitectureToJson(const tsmodel::ConvNetArchitecture& a) {
  return {{"conv_filters", a.conv_filters},
          {"kernel", a.kernel},
          {"dilation", a.dilation},
          {"conv_activation", tsmodel::ToString(a.conv_activation)},
          {"dense_units", a.dense_units},
          {"dense_activation", tsmodel::ToString(a.dense_activation)},
          {"bias", a.bias}};
}

tsmodel::ConvNetArchitecture ArchitectureFromJson(const json& doc) {
  tsmodel::ConvNetArchitecture a;
  a.conv_filters = doc.value("conv_filters", a.conv_filters);
  a.kernel = doc.value("kernel", a.kernel);
  a.dilation = doc.value("dilation", a.dilation);
  if (doc.contains("conv_activation")) {
    a.conv_activation =
        tsmodel::ParseActivation(doc.at("conv_activation").get<std::string>());
  }
  a.dense_units = doc.value("dense_units", a.dense_units);
  if (doc.contains("dense_activation")) {
    a.dense_activation =
        tsmodel::ParseActivation(doc.at("dense_activation").get<std::string>());
  }
  a.bias = doc.value("bias", a.bias);
  return a;
}

void RequireKnownKeys(const json& doc, const std::set<std::string>& known,
                      const std::string& where) {
  for (const auto& item : doc.items()) {
    if (!known.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

std::string Slug(const ExplainerConfig& c) {
  std::string s = attribution::ToString(c.method);
  if (attribution::UsesSegments(c.method)) {
    s += "_" + segperturb::ToString(c.perturbation);
  }
  return s;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void Log(const std::string& msg) { std::cerr << "[tsxai] " << msg << '\n'; }

std::vector<dataset::Sample> Head(const std::vector<dataset::Sample>& v,
                                  std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size()))};
}

proxies::ProxyOptions ProxyOptionsFor(const ExperimentConfig& config) {
  proxies::ProxyOptions o = config.proxy;
  o.seed = DeriveStageSeeds(config.seed).proxies;
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration.

json TrainingConfig::ToJson() const {
  return {{"architecture", ArchitectureToJson(architecture)},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size}};
}

TrainingConfig TrainingConfig::FromJson(const json& doc) {
  RequireKnownKeys(doc, {"architecture", "epochs", "learning_rate", "batch_size"},
                   "training");
  TrainingConfig t;
  if (doc.contains("architecture")) {
    t.architecture = ArchitectureFromJson(doc.at("architecture"));
  }
  t.epochs = doc.value("epochs", t.epochs);
  t.learning_rate = doc.value("learning_rate", t.learning_rate);
  t.batch_size = doc.value("batch_size", t.batch_size);
  return t;
}

std::vector<ExplainerConfig> DefaultExplainers() {
  std::vector<ExplainerConfig> out;
  ExplainerConfig base;
  base.method = Method::kSaliency;
  out.push_back(base);
  base.method = Method::kLrp;
  out.push_back(base);
  base.method = Method::kGradCam;
  base.layer_index = 1;
  out.push_back(base);
  for (Method m : {Method::kLime, Method::kKernelShap}) {
    for (Perturbation p :
         {Perturbation::kZero, Perturbation::kOne, Perturbation::kMean,
          Perturbation::kUniformNoise, Perturbation::kNormalNoise}) {
      ExplainerConfig c;
      c.method = m;
      c.perturbation = p;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<double> MakeGrid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be > 0");
  if (stop < start) throw ConfigError("grid stop must be >= start");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + 0.5 * step) break;
    out.push_back(std::min(v, stop));
  }
  return out;
}

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> parts;
  const bool range = text.find(':') != std::string::npos;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, range ? ':' : ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad grid value '" + item + "' in '" + text + "'");
    }
  }
  if (range) {
    if (parts.size() != 3) {
      throw ConfigError("grid range must be start:stop:step, got '" + text + "'");
    }
    return MakeGrid(parts[0], parts[1], parts[2]);
  }
  if (parts.empty()) throw ConfigError("empty grid");
  return parts;
}

std::vector<std::size_t> ParseIndexList(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad index '" + item + "' in '" + text + "'");
    }
  }
  return out;
}

void ExperimentConfig::ApplyDefaults() {
  if (explainers.empty()) explainers = DefaultExplainers();
  if (beta_grid.empty()) beta_grid = MakeGrid(0.0, 1.0, 0.1);
  if (sigma_grid.empty()) sigma_grid = MakeGrid(0.0, 1.0, 0.1);
}

void ExperimentConfig::Validate() const {
  try {
    fleet.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("fleet: ") + e.what());
  }
  if (window < 1 || window >= fleet.life_min * fleet.steps_per_cycle) {
    throw ConfigError("window must be in [1, shortest unit length)");
  }
  if (test_units < 1 || test_units >= fleet.n_units) {
    throw ConfigError("test_units must be in [1, n_units)");
  }
  if (model_path.empty() == !training.has_value()) {
    throw ConfigError("specify exactly one of model_path and training");
  }
  if (!model_path.empty() && !fs::exists(model_path)) {
    throw ConfigError("model file not found: " + model_path);
  }
  if (training) {
    if (training->epochs < 1 || training->batch_size < 1 ||
        !(training->learning_rate > 0.0)) {
      throw ConfigError("training needs epochs, batch_size >= 1, lr > 0");
    }
  }
  for (const ExplainerConfig& e : explainers) e.Validate();
  proxy.Validate();
  if (eval_samples < 1) throw ConfigError("eval_samples must be >= 1");
  for (double v : beta_grid) {
    if (v < 0.0 || v > 1.0) throw ConfigError("beta grid values must be in [0,1]");
  }
  for (double v : sigma_grid) {
    if (v < 0.0 || v > 1.0) {
      throw ConfigError("sigma grid values must be in [0,1]");
    }
  }
  if (grid_samples < 1 || sweep_samples < 1) {
    throw ConfigError("grid/sweep sample counts must be >= 1");
  }
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

json ExperimentConfig::ToJson() const {
  json explainer_list = json::array();
  for (const ExplainerConfig& e : explainers) explainer_list.push_back(e.ToJson());
  json doc = {{"schema_version", kSchemaVersion},
              {"seed", seed},
              {"fleet", fleet.ToJson()},
              {"window", window},
              {"test_units", test_units},
              {"explainers", explainer_list},
              {"proxies", proxy.ToJson()},
              {"eval_samples", eval_samples},
              {"grid",
               {{"beta", beta_grid},
                {"sigma", sigma_grid},
                {"layer", grid_layer},
                {"samples", grid_samples}}},
              {"sweep", {{"layers", sweep_layers}, {"samples", sweep_samples}}},
              {"emit_heatmaps", emit_heatmaps},
              {"out_dir", out_dir}};
  if (!model_path.empty()) {
    doc["model_path"] = model_path;
  } else if (training) {
    doc["training"] = training->ToJson();
  }
  doc["proxies"].erase("seed");
  return doc;
}

ExperimentConfig ExperimentConfig::FromJson(const json& input) {
  const json& doc = input.contains("config") && input.contains("config_hash")
                        ? input.at("config")
                        : input;
  if (!doc.is_object()) throw ConfigError("configuration must be an object");
  ExperimentConfig c;
  try {
    RequireKnownKeys(doc,
                     {"schema_version", "seed", "fleet", "window", "test_units",
                      "model_path", "training", "explainers", "proxies",
                      "eval_samples", "grid", "sweep", "emit_heatmaps",
                      "out_dir"},
                     "config");
    const int version = doc.value("schema_version", kSchemaVersion);
    if (version != kSchemaVersion) {
      throw ConfigError("unsupported schema_version " + std::to_string(version));
    }
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("fleet")) {
      c.fleet = dataset::FleetConfig::FromJson(doc.at("fleet"));
    }
    c.window = doc.value("window", c.window);
    c.test_units = doc.value("test_units", c.test_units);
    if (doc.contains("model_path") && doc.contains("training")) {
      throw ConfigError("specify exactly one of model_path and training");
    }
    if (doc.contains("model_path")) {
      c.model_path = doc.at("model_path").get<std::string>();
      c.training.reset();
    }
    if (doc.contains("training")) {
      c.training = TrainingConfig::FromJson(doc.at("training"));
    }
    if (doc.contains("explainers")) {
      for (const json& e : doc.at("explainers")) {
        c.explainers.push_back(ExplainerConfig::FromJson(e));
      }
    }
    if (doc.contains("proxies")) {
      c.proxy = proxies::ProxyOptions::FromJson(doc.at("proxies"));
    }
    c.eval_samples = doc.value("eval_samples", c.eval_samples);
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      RequireKnownKeys(g, {"beta", "sigma", "layer", "samples"}, "grid");
      c.beta_grid = g.value("beta", c.beta_grid);
      c.sigma_grid = g.value("sigma", c.sigma_grid);
      c.grid_layer = g.value("layer", c.grid_layer);
      c.grid_samples = g.value("samples", c.grid_samples);
    }
    if (doc.contains("sweep")) {
      const json& s = doc.at("sweep");
      RequireKnownKeys(s, {"layers", "samples"}, "sweep");
      c.sweep_layers = s.value("layers", c.sweep_layers);
      c.sweep_samples = s.value("samples", c.sweep_samples);
    }
    c.emit_heatmaps = doc.value("emit_heatmaps", c.emit_heatmaps);
    c.out_dir = doc.value("out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.ApplyDefaults();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return ExperimentConfig::FromJson(doc);
}

std::string Fnv1aHex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ConfigHash(const ExperimentConfig& config) {
  json doc = config.ToJson();
  doc.erase("out_dir");
  return Fnv1aHex(doc.dump());
}

json StageSeeds::ToJson() const {
  return {{"data", data},
          {"init", init},
          {"shuffle", shuffle},
          {"selection", selection},
          {"proxies", proxies}};
}

StageSeeds DeriveStageSeeds(std::uint64_t master) {
  StageSeeds s;
  s.data = DeriveSeed(master, kStageStream, kData);
  s.init = DeriveSeed(master, kStageStream, kInit);
  s.shuffle = DeriveSeed(master, kStageStream, kShuffle);
  s.selection = DeriveSeed(master, kStageStream, kSelection);
  s.proxies = DeriveSeed(master, kStageStream, kProxies);
  return s;
}

// ---------------------------------------------------------------------------
// Pipeline stages.

PreparedData PrepareData(const ExperimentConfig& config) {
  config.Validate();
  const StageSeeds seeds = DeriveStageSeeds(config.seed);
  PreparedData data;
  data.fleet = dataset::GenerateFleet(config.fleet, seeds.data);
  const std::size_t n_train = data.fleet.size() - config.test_units;
  std::vector<dataset::UnitHistory> train_units(
      data.fleet.begin(), data.fleet.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.normalization = dataset::ZScoreFit(train_units);
  for (std::size_t u = 0; u < data.fleet.size(); ++u) {
    const dataset::UnitHistory unit =
        dataset::ZScoreApply(data.normalization, data.fleet[u]);
    std::vector<dataset::Sample> windows =
        dataset::SlidingWindows(unit, config.window);
    auto& dst = u < n_train ? data.train : data.test;
    dst.insert(dst.end(), std::make_move_iterator(windows.begin()),
               std::make_move_iterator(windows.end()));
  }
  std::vector<std::size_t> order(data.test.size());
  std::iota(order.begin(), order.end(), 0);
  RandomEngine rng(seeds.selection);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(order.size(), config.eval_samples));
  for (std::size_t i : order) data.evaluation.push_back(data.test[i]);
  return data;
}

std::vector<Matrix> Inputs(const std::vector<dataset::Sample>& samples) {
  std::vector<Matrix> out;
  out.reserve(samples.size());
  for (const dataset::Sample& s : samples) out.push_back(s.x);
  return out;
}

TrainedModel ObtainModel(const ExperimentConfig& config,
                         const PreparedData& data) {
  const StageSeeds seeds = DeriveStageSeeds(config.seed);
  const tsmodel::Shape expected{static_cast<std::size_t>(config.fleet.channels),
                                static_cast<std::size_t>(config.window)};
  std::optional<tsmodel::Model> model;
  std::vector<double> loss;
  if (!config.model_path.empty()) {
    model = tsmodel::LoadModel(config.model_path);
    if (!(model->input_shape() == expected)) {
      throw ConfigError("model input shape does not match channels x window");
    }
  } else {
    tsmodel::ConvNetArchitecture arch = config.training->architecture;
    arch.channels = expected.channels;
    arch.window = expected.length;
    tsmodel::Model init =
        tsmodel::InitializeParameters(tsmodel::BuildConvNet(arch), seeds.init);
    // Start the output at the mean label so the relu head is active.
    std::vector<tsmodel::LayerSpec> layers = init.layers();
    double mean_label = 0.0;
    for (const dataset::Sample& s : data.train) mean_label += s.y;
    mean_label /= static_cast<double>(std::max<std::size_t>(1, data.train.size()));
    if (layers.back().has_bias()) layers.back().biases[0] = mean_label;
    init = init.WithLayers(std::move(layers));

    std::vector<tsmodel::TrainingExample> examples;
    examples.reserve(data.train.size());
    for (const dataset::Sample& s : data.train) examples.push_back({s.x, s.y});
    tsmodel::TrainingOptions opts;
    opts.learning_rate = config.training->learning_rate;
    opts.batch_size = config.training->batch_size;
    opts.epochs = config.training->epochs;
    opts.seed = seeds.shuffle;
    tsmodel::TrainingResult trained = tsmodel::Train(init, examples, opts);
    model = std::move(trained.model);
    loss = std::move(trained.epoch_loss);
  }
  std::vector<dataset::PredictionPair> pairs;
  for (const dataset::Sample& s : data.test) {
    pairs.push_back({s.y, tsmodel::Predict(*model, s.x)});
  }
  TrainedModel out{std::move(*model), std::move(loss), 0.0, 0.0};
  if (!pairs.empty()) {
    out.test_rmse = dataset::Rmse(pairs);
    out.test_nasa = dataset::NasaScore(pairs);
  }
  return out;
}

std::vector<proxies::ProxyReport> EvaluateMethods(
    const ExperimentConfig& config, const tsmodel::Model& model,
    const PreparedData& data) {
  const segperturb::FeatureStats stats =
      segperturb::FeatureStats::FromSamples(Inputs(data.evaluation));
  const proxies::ProxyOptions options = ProxyOptionsFor(config);
  std::vector<proxies::ProxyReport> reports;
  for (const ExplainerConfig& c : config.explainers) {
    Log("evaluating " + c.Label() + " (" + c.PerturbationLabel() + ") on " +
        std::to_string(data.evaluation.size()) + " samples");
    const attribution::MethodExplainer explainer(model, c, stats);
    proxies::ProxyReport r =
        proxies::EvaluateAll(model, explainer, data.evaluation, options);
    r.method = c.Label();
    r.perturbation = c.PerturbationLabel();
    r.fingerprint = c.Fingerprint();
    reports.push_back(std::move(r));
  }
  return reports;
}

namespace {

ExplainerConfig GradCamTemplate(const ExperimentConfig& config) {
  for (const ExplainerConfig& c : config.explainers) {
    if (c.method == Method::kGradCam) return c;
  }
  ExplainerConfig c;
  c.method = Method::kGradCam;
  return c;
}

}  // namespace

std::vector<LayerReport> SweepLayers(const ExperimentConfig& config,
                                     const tsmodel::Model& model,
                                     const PreparedData& data) {
  std::vector<std::size_t> layers = config.sweep_layers;
  if (layers.empty()) layers = model.ConvLayerIndices();
  if (layers.empty()) throw ConfigError("model has no conv1d layer to sweep");
  const std::vector<dataset::Sample> samples =
      Head(data.evaluation, config.sweep_samples);
  proxies::EvaluationPlan plan;
  plan.identity = false;
  std::vector<LayerReport> out;
  for (std::size_t layer : layers) {
    ExplainerConfig c = GradCamTemplate(config);
    c.layer_index = layer;
    Log("sweep: Grad-CAM at layer " + std::to_string(layer));
    const attribution::MethodExplainer explainer(model, c);
    proxies::ProxyReport r = proxies::EvaluateAll(
        model, explainer, samples, ProxyOptionsFor(config), plan);
    r.method = c.Label();
    r.fingerprint = c.Fingerprint();
    out.push_back({layer, std::move(r)});
  }
  return out;
}

std::vector<GridPoint> GridSearch(const ExperimentConfig& config,
                                  const tsmodel::Model& model,
                                  const PreparedData& data) {
  const std::vector<dataset::Sample> samples =
      Head(data.evaluation, config.grid_samples);
  proxies::EvaluationPlan plan;
  plan.identity = false;
  Log("grid: " + std::to_string(config.beta_grid.size() *
                                config.sigma_grid.size()) +
      " Grad-CAM configurations at layer " + std::to_string(config.grid_layer));
  std::vector<GridPoint> out;
  for (double beta : config.beta_grid) {
    for (double sigma : config.sigma_grid) {
      ExplainerConfig c = GradCamTemplate(config);
      c.layer_index = config.grid_layer;
      c.beta = beta;
      c.sigma = sigma;
      const attribution::MethodExplainer explainer(model, c);
      proxies::ProxyReport r = proxies::EvaluateAll(
          model, explainer, samples, ProxyOptionsFor(config), plan);
      r.method = c.Label();
      r.fingerprint = c.Fingerprint();
      out.push_back({beta, sigma, std::move(r)});
    }
  }
  return out;
}

void WriteSweepCsv(const std::vector<LayerReport>& sweep,
                   const std::string& path) {
  std::ostringstream out;
  out << "layer,proxy,score\n";
  for (const LayerReport& l : sweep) {
    const proxies::ProxyReport& r = l.report;
    const std::pair<const char*, const std::optional<double>*> rows[] = {
        {"separability", &r.separability}, {"stability", &r.stability},
        {"selectivity", &r.selectivity},   {"coherence", &r.coherence},
        {"completeness", &r.completeness}, {"congruency", &r.congruency},
        {"acumen", &r.acumen}};
    for (const auto& [name, value] : rows) {
      out << l.layer << ',' << name << ',' << Cell(*value) << '\n';
    }
  }
  WriteText(path, out.str());
}

void WriteGridCsv(const std::vector<GridPoint>& grid, const std::string& path) {
  std::ostringstream out;
  out << "beta,sigma,Sep,Sta,Sel,Coh,Comp,Cong,Acu\n";
  for (const GridPoint& p : grid) {
    const proxies::ProxyReport& r = p.report;
    out << FormatNumber(p.beta, "%.4g") << ',' << FormatNumber(p.sigma, "%.4g")
        << ',' << Cell(r.separability) << ',' << Cell(r.stability) << ','
        << Cell(r.selectivity) << ',' << Cell(r.coherence) << ','
        << Cell(r.completeness) << ',' << Cell(r.congruency) << ','
        << Cell(r.acumen) << '\n';
  }
  WriteText(path, out.str());
}

std::vector<std::string> EmitHeatmaps(const ExperimentConfig& config,
                                      const tsmodel::Model& model,
                                      const PreparedData& data) {
  std::vector<std::string> written;
  const std::size_t n = std::min(config.emit_heatmaps, data.evaluation.size());
  if (n == 0) return written;
  const fs::path dir = fs::path(config.out_dir) / "heatmaps";
  fs::create_directories(dir);
  const segperturb::FeatureStats stats =
      segperturb::FeatureStats::FromSamples(Inputs(data.evaluation));
  const std::uint64_t seed = ProxyOptionsFor(config).seed;
  for (std::size_t k = 0; k < config.explainers.size(); ++k) {
    const ExplainerConfig& c = config.explainers[k];
    const attribution::MethodExplainer explainer(model, c, stats);
    for (std::size_t s = 0; s < n; ++s) {
      // Same seed as the first explanation during evaluation.
      const attribution::AttributionMap map =
          explainer.Explain(data.evaluation[s].x, DeriveSeed(seed, s, 1));
      char prefix[64];
      std::snprintf(prefix, sizeof(prefix), "sample%02zu_%02zu_", s, k);
      const std::string stem = prefix + Slug(c);
      attribution::WriteMapCsv(map, (dir / (stem + ".csv")).string());
      attribution::WriteMapPgm(map, (dir / (stem + ".pgm")).string(),
                               (dir / (stem + ".json")).string());
      for (const char* ext : {".csv", ".pgm", ".json"}) {
        written.push_back("heatmaps/" + stem + ext);
      }
    }
  }
  return written;
}

json BuildManifest(const ExperimentConfig& config, const PreparedData& data,
                   const std::vector<std::string>& outputs) {
  json selected = json::array();
  for (const dataset::Sample& s : data.evaluation) {
    selected.push_back({{"unit_id", s.unit_id}, {"t_end", s.t_end}, {"label", s.y}});
  }
  std::vector<int> test_units;
  for (std::size_t u = data.fleet.size() - config.test_units;
       u < data.fleet.size(); ++u) {
    test_units.push_back(data.fleet[u].unit_id);
  }
  return {{"tool", "tsxai"},
          {"version", kVersion},
          {"schema_version", kSchemaVersion},
          {"versions",
           {{"tsxai", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}},
          {"config", config.ToJson()},
          {"config_hash", ConfigHash(config)},
          {"seeds", DeriveStageSeeds(config.seed).ToJson()},
          {"normalization", data.normalization.ToJson()},
          {"test_units", test_units},
          {"selected_samples", selected},
          {"outputs", outputs}};
}

RunSummary RunExperiment(const ExperimentConfig& input) {
  ExperimentConfig config = input;
  config.ApplyDefaults();
  config.Validate();
  const fs::path out = config.out_dir;
  fs::create_directories(out);
  RunSummary summary;

  Log("preparing data");
  const PreparedData data = PrepareData(config);
  Log(std::to_string(data.train.size()) + " training windows, " +
      std::to_string(data.evaluation.size()) + " evaluation samples");

  const TrainedModel trained = ObtainModel(config, data);
  tsmodel::SaveModel(trained.model, (out / "model.json").string());
  summary.outputs.push_back("model.json");
  json training = {{"parameters", tsmodel::ParameterCount(trained.model)},
                   {"epoch_loss", trained.epoch_loss},
                   {"test_rmse", trained.test_rmse},
                   {"test_nasa", trained.test_nasa}};
  WriteText(out / "training.json", training.dump(2) + "\n");
  summary.outputs.push_back("training.json");
  Log("model: " + std::to_string(tsmodel::ParameterCount(trained.model)) +
      " parameters, test RMSE " + FormatNumber(trained.test_rmse, "%.3f"));

  const std::vector<proxies::ProxyReport> reports =
      EvaluateMethods(config, trained.model, data);
  proxies::WriteReportsCsv(reports, (out / "reports.csv").string());
  proxies::WriteReportsJson(reports, (out / "reports.json").string());
  summary.outputs.push_back("reports.csv");
  summary.outputs.push_back("reports.json");

  const std::vector<LayerReport> sweep = SweepLayers(config, trained.model, data);
  WriteSweepCsv(sweep, (out / "sweep.csv").string());
  summary.outputs.push_back("sweep.csv");

  const std::vector<GridPoint> grid = GridSearch(config, trained.model, data);
  WriteGridCsv(grid, (out / "grid.csv").string());
  summary.outputs.push_back("grid.csv");

  const std::vector<std::string> maps = EmitHeatmaps(config, trained.model, data);
  summary.outputs.insert(summary.outputs.end(), maps.begin(), maps.end());

  summary.manifest = BuildManifest(config, data, summary.outputs);
  WriteText(out / "manifest.json", summary.manifest.dump(2) + "\n");
  Log("wrote " + (out / "manifest.json").string());
  return summary;
}

}  // namespace tsxai::cli
