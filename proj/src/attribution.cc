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

#include "tsxai/attribution.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tsxai/errors.h"

namespace tsxai::attribution {

using nlohmann::json;
using segperturb::Perturbation;
using segperturb::SegmentationKind;
using tsmodel::LayerKind;
using tsmodel::LayerSpec;
using tsmodel::Model;

std::string ToString(Method method) {
  switch (method) {
    case Method::kSaliency:
      return "saliency";
    case Method::kGradCam:
      return "gradcam";
    case Method::kLrp:
      return "lrp";
    case Method::kLime:
      return "lime";
    case Method::kKernelShap:
      return "shap";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  if (name == "saliency") return Method::kSaliency;
  if (name == "gradcam" || name == "grad-cam") return Method::kGradCam;
  if (name == "lrp") return Method::kLrp;
  if (name == "lime") return Method::kLime;
  if (name == "shap" || name == "kernel_shap") return Method::kKernelShap;
  throw ConfigError("unknown explanation method '" + name + "'");
}

bool UsesSegments(Method method) {
  return method == Method::kLime || method == Method::kKernelShap;
}

std::string ToString(ShapKernel kernel) {
  return kernel == ShapKernel::kStandard ? "standard" : "literal";
}

ShapKernel ParseShapKernel(const std::string& name) {
  if (name == "standard") return ShapKernel::kStandard;
  if (name == "literal") return ShapKernel::kLiteral;
  throw ConfigError("unknown SHAP kernel '" + name + "'");
}

double ShapKernelWeight(ShapKernel kernel, std::size_t m, std::size_t present) {
  if (present == 0 || present >= m) {
    throw InvalidArgument("empty and full coalitions have infinite weight");
  }
  // C(m, present) in floating point; exact for the sizes used here.
  double binom = 1.0;
  const std::size_t k = std::min(present, m - present);
  for (std::size_t i = 1; i <= k; ++i) {
    binom = binom * static_cast<double>(m - k + i) / static_cast<double>(i);
  }
  const double md = static_cast<double>(m);
  const double zd = static_cast<double>(present);
  if (kernel == ShapKernel::kLiteral) return (md - 1.0) / (binom * (md - zd));
  return (md - 1.0) / (binom * zd * (md - zd));
}

// ---------------------------------------------------------------------------

void ExplainerConfig::Validate() const {
  if (beta < 0.0 || beta > 1.0 || sigma < 0.0 || sigma > 1.0) {
    throw ConfigError("beta and sigma must lie in [0, 1]");
  }
  if (UsesSegments(method)) {
    if (segments_per_channel < 1) {
      throw ConfigError("segments_per_channel must be >= 1");
    }
    if (neighborhood < 1) throw ConfigError("neighborhood must be >= 1");
    if (!(kernel_width > 0.0)) throw ConfigError("kernel_width must be > 0");
    if (!(ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
  }
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
}

std::string ExplainerConfig::Label() const {
  switch (method) {
    case Method::kSaliency:
      return "Saliency";
    case Method::kGradCam:
      return "Grad-CAM";
    case Method::kLrp:
      return "LRP";
    case Method::kLime:
      return "LIME";
    case Method::kKernelShap:
      return "SHAP";
  }
  return "unknown";
}

std::string ExplainerConfig::PerturbationLabel() const {
  return UsesSegments(method) ? segperturb::ToString(perturbation) : "-";
}

json ExplainerConfig::Fingerprint() const {
  json fp = {{"method", ToString(method)}};
  switch (method) {
    case Method::kSaliency:
      break;
    case Method::kGradCam:
      fp["layer"] = layer_index;
      fp["beta"] = beta;
      fp["sigma"] = sigma;
      break;
    case Method::kLrp:
      fp["epsilon"] = epsilon;
      break;
    case Method::kLime:
      fp["kernel_width"] = kernel_width;
      fp["ridge"] = ridge;
      [[fallthrough]];
    case Method::kKernelShap:
      fp["segmentation"] = segperturb::ToString(segmentation);
      fp["segments_per_channel"] = segments_per_channel;
      fp["perturbation"] = segperturb::ToString(perturbation);
      fp["neighborhood"] = neighborhood;
      if (method == Method::kKernelShap) {
        fp["shap_kernel"] = ToString(shap_kernel);
      }
      fp["seed"] = seed;
      break;
  }
  return fp;
}

json ExplainerConfig::ToJson() const {
  return {{"method", ToString(method)},
          {"segmentation", segperturb::ToString(segmentation)},
          {"segments_per_channel", segments_per_channel},
          {"perturbation", segperturb::ToString(perturbation)},
          {"neighborhood", neighborhood},
          {"kernel_width", kernel_width},
          {"ridge", ridge},
          {"shap_kernel", ToString(shap_kernel)},
          {"layer", layer_index},
          {"beta", beta},
          {"sigma", sigma},
          {"epsilon", epsilon},
          {"seed", seed}};
}

ExplainerConfig ExplainerConfig::FromJson(const json& doc) {
  ExplainerConfig c;
  try {
    c.method = ParseMethod(doc.at("method").get<std::string>());
    if (doc.contains("segmentation")) {
      c.segmentation = segperturb::ParseSegmentationKind(
          doc.at("segmentation").get<std::string>());
    }
    c.segments_per_channel =
        doc.value("segments_per_channel", c.segments_per_channel);
    if (doc.contains("perturbation")) {
      c.perturbation = segperturb::ParsePerturbation(
          doc.at("perturbation").get<std::string>());
    }
    c.neighborhood = doc.value("neighborhood", c.neighborhood);
    c.kernel_width = doc.value("kernel_width", c.kernel_width);
    c.ridge = doc.value("ridge", c.ridge);
    if (doc.contains("shap_kernel")) {
      c.shap_kernel = ParseShapKernel(doc.at("shap_kernel").get<std::string>());
    }
    c.layer_index = doc.value("layer", c.layer_index);
    c.beta = doc.value("beta", c.beta);
    c.sigma = doc.value("sigma", c.sigma);
    c.epsilon = doc.value("epsilon", c.epsilon);
    c.seed = doc.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("explainer config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  c.Validate();
  return c;
}

// ---------------------------------------------------------------------------
// Gradient-based methods.

AttributionMap Saliency(const Model& model, const Matrix& x) {
  AttributionMap map;
  map.values = tsmodel::InputGradient(model, x);
  map.method = "saliency";
  map.fingerprint = {{"method", "saliency"}};
  return map;
}

namespace {

// K x F row-normalised correspondence of the feature maps of conv layer
// `layer_index` to the input channels.
Matrix ChannelCorrespondence(const Model& model, std::size_t layer_index) {
  Matrix chain;  // out_l x F
  for (std::size_t l = 0; l <= layer_index; ++l) {
    const LayerSpec& spec = model.layer(l);
    if (spec.kind != LayerKind::kConv1D) {
      throw InvalidArgument(
          "channel component needs conv layers only up to layer " +
          std::to_string(layer_index));
    }
    Matrix abs_sum(spec.out, spec.in);
    for (int o = 0; o < spec.out; ++o) {
      for (int i = 0; i < spec.in; ++i) {
        double s = 0.0;
        for (int j = 0; j < spec.kernel; ++j) {
          s += std::abs(spec.conv_weight(o, i, j));
        }
        abs_sum(o, i) = s;
      }
    }
    if (l == 0) {
      chain = std::move(abs_sum);
      continue;
    }
    Matrix next(spec.out, chain.cols());
    for (int o = 0; o < spec.out; ++o) {
      for (int i = 0; i < spec.in; ++i) {
        const double w = abs_sum(o, i);
        if (w == 0.0) continue;
        for (std::size_t f = 0; f < chain.cols(); ++f) {
          next(o, f) += w * chain(i, f);
        }
      }
    }
    chain = std::move(next);
  }
  for (std::size_t k = 0; k < chain.rows(); ++k) {
    auto row = chain.row(k);
    const double total = Sum(row);
    for (double& v : row) {
      v = total > 0.0 ? v / total : 1.0 / static_cast<double>(row.size());
    }
  }
  return chain;
}

}  // namespace

GradCamComponents ComputeGradCamComponents(const Model& model, const Matrix& x,
                                           std::size_t layer_index) {
  const tsmodel::FeatureMapGradient fm =
      tsmodel::ComputeFeatureMapGradient(model, x, layer_index);
  const Matrix& a = fm.activation;
  const Matrix& g = fm.gradient;
  const std::size_t maps = a.rows();
  const std::size_t length = a.cols();
  const std::size_t features = x.rows();

  std::vector<double> pooled(maps, 0.0);
  for (std::size_t k = 0; k < maps; ++k) {
    pooled[k] = Sum(g.row(k)) / static_cast<double>(length);
  }

  GradCamComponents parts;
  parts.global = Matrix(1, length);
  parts.time = Matrix(1, length);
  for (std::size_t t = 0; t < length; ++t) {
    double global = 0.0;
    double time = 0.0;
    for (std::size_t k = 0; k < maps; ++k) {
      global += pooled[k] * a(k, t);
      time += g(k, t) * a(k, t);
    }
    parts.global(0, t) = global;
    parts.time(0, t) = time;
  }

  parts.correspondence = ChannelCorrespondence(model, layer_index);
  parts.channel = Matrix(features, length);
  const double fd = static_cast<double>(features);
  for (std::size_t f = 0; f < features; ++f) {
    for (std::size_t t = 0; t < length; ++t) {
      double v = 0.0;
      for (std::size_t k = 0; k < maps; ++k) {
        v += pooled[k] * fd * parts.correspondence(k, f) * a(k, t);
      }
      parts.channel(f, t) = v;
    }
  }
  return parts;
}

Matrix CombineGradCam(const GradCamComponents& parts, double beta,
                      double sigma) {
  const std::size_t features = parts.channel.rows();
  const std::size_t length = parts.global.cols();
  Matrix out(features, length);
  for (std::size_t f = 0; f < features; ++f) {
    for (std::size_t t = 0; t < length; ++t) {
      out(f, t) = parts.global(0, t) + beta * parts.time(0, t) +
                  sigma * parts.channel(f, t);
    }
  }
  return out;
}

Matrix InterpolateRows(const Matrix& m, std::size_t length) {
  if (m.cols() == length) return m;
  if (m.cols() == 0 || length == 0) {
    throw ShapeError("cannot interpolate an empty map");
  }
  Matrix out(m.rows(), length);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t t = 0; t < length; ++t) {
      if (m.cols() == 1 || length == 1) {
        out(r, t) = m(r, 0);
        continue;
      }
      const double pos = static_cast<double>(t) *
                         static_cast<double>(m.cols() - 1) /
                         static_cast<double>(length - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, m.cols() - 1);
      const double w = pos - static_cast<double>(lo);
      out(r, t) = (1.0 - w) * m(r, lo) + w * m(r, hi);
    }
  }
  return out;
}

AttributionMap GradCam(const Model& model, const Matrix& x,
                       std::size_t layer_index, double beta, double sigma) {
  if (beta < 0.0 || beta > 1.0 || sigma < 0.0 || sigma > 1.0) {
    throw InvalidArgument("beta and sigma must lie in [0, 1]");
  }
  const GradCamComponents parts =
      ComputeGradCamComponents(model, x, layer_index);
  Matrix raw = CombineGradCam(parts, beta, sigma);
  for (double& v : raw.values()) v = v > 0.0 ? v : 0.0;

  AttributionMap map;
  map.values = InterpolateRows(raw, x.cols());
  map.method = "gradcam";
  map.fingerprint = {{"method", "gradcam"},
                     {"layer", layer_index},
                     {"beta", beta},
                     {"sigma", sigma}};
  return map;
}

AttributionMap Lrp(const Model& model, const Matrix& x, double epsilon) {
  AttributionMap map;
  map.values = tsmodel::RelevancePropagate(model, x, epsilon);
  map.method = "lrp";
  map.fingerprint = {{"method", "lrp"}, {"epsilon", epsilon}};
  return map;
}

// ---------------------------------------------------------------------------

MethodExplainer::MethodExplainer(const Model& model, ExplainerConfig config,
                                 segperturb::FeatureStats stats)
    : model_(model), config_(std::move(config)), stats_(std::move(stats)) {
  config_.Validate();
  if (config_.method == Method::kGradCam) {
    if (config_.layer_index >= model_.layer_count() ||
        model_.layer(config_.layer_index).kind != LayerKind::kConv1D) {
      throw ConfigError("Grad-CAM layer " + std::to_string(config_.layer_index) +
                        " is not a conv1d layer");
    }
  }
  if (UsesSegments(config_.method) &&
      segperturb::IsStochastic(config_.perturbation) &&
      stats_.mean.size() != model_.input_shape().channels) {
    throw ConfigError("noise perturbation needs per-feature statistics");
  }
}

AttributionMap MethodExplainer::Explain(const Matrix& x,
                                        std::uint64_t seed) const {
  switch (config_.method) {
    case Method::kSaliency:
      return Saliency(model_, x);
    case Method::kGradCam:
      return GradCam(model_, x, config_.layer_index, config_.beta,
                     config_.sigma);
    case Method::kLrp:
      return Lrp(model_, x, config_.epsilon);
    case Method::kLime: {
      ExplainerConfig c = config_;
      c.seed = seed;
      return Lime(model_, x, c, stats_).map;
    }
    case Method::kKernelShap: {
      ExplainerConfig c = config_;
      c.seed = seed;
      return KernelShap(model_, x, c, stats_).map;
    }
  }
  throw InvalidArgument("unknown method");
}

AttributionMap FunctionExplainer::Explain(const Matrix& x,
                                          std::uint64_t seed) const {
  AttributionMap map;
  map.values = fn_(x, seed);
  map.method = name_;
  map.fingerprint = {{"method", name_}};
  if (!map.values.SameShape(x)) {
    throw ShapeError("explainer '" + name_ + "' returned a mis-shaped map");
  }
  return map;
}

// ---------------------------------------------------------------------------
// Export.

void WriteMapCsv(const AttributionMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  char buf[40];
  for (std::size_t f = 0; f < map.values.rows(); ++f) {
    for (std::size_t t = 0; t < map.values.cols(); ++t) {
      std::snprintf(buf, sizeof(buf), "%.17g", map.values(f, t));
      if (t > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void WriteMapPgm(const AttributionMap& map, const std::string& pgm_path,
                 const std::string& sidecar_path) {
  const auto values = map.values.values();
  if (values.empty()) throw InvalidArgument("cannot render an empty map");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double max = *hi;
  std::ofstream out(pgm_path, std::ios::binary);
  if (!out) throw Error("cannot write " + pgm_path);
  out << "P5\n" << map.values.cols() << ' ' << map.values.rows() << "\n255\n";
  for (double v : values) {
    const double scaled = max > min ? (v - min) / (max - min) : 0.0;
    out.put(static_cast<char>(
        static_cast<unsigned char>(std::lround(scaled * 255.0))));
  }
  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw Error("cannot write " + sidecar_path);
  const json doc = {{"min", min},
                    {"max", max},
                    {"rows", map.values.rows()},
                    {"cols", map.values.cols()},
                    {"method", map.method},
                    {"fingerprint", map.fingerprint}};
  side << doc.dump(2) << '\n';
}

}  // namespace tsxai::attribution
