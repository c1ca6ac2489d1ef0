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

// Explanation methods producing F x T attribution maps for a scalar
// regression model: saliency, Grad-CAM with time/channel components, LRP,
// LIME and Kernel SHAP over segment coalitions.

#ifndef TSXAI_ATTRIBUTION_H_
#define TSXAI_ATTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsxai/matrix.h"
#include "tsxai/model.h"
#include "tsxai/segperturb.h"

namespace tsxai::attribution {

enum class Method { kSaliency, kGradCam, kLrp, kLime, kKernelShap };

std::string ToString(Method method);
Method ParseMethod(const std::string& name);
// True for the perturbation-based surrogates.
bool UsesSegments(Method method);

// Kernel SHAP coalition weight. kStandard includes the |z'| factor of the
// Shapley kernel; kLiteral evaluates (M-1) / (C(M,|z'|) (M-|z'|)).
enum class ShapKernel { kStandard, kLiteral };

std::string ToString(ShapKernel kernel);
ShapKernel ParseShapKernel(const std::string& name);

// Weight of a coalition with `present` of `m` segments present. Throws for
// the infinite-weight coalitions (present == 0 or present == m).
double ShapKernelWeight(ShapKernel kernel, std::size_t m, std::size_t present);

struct AttributionMap {
  Matrix values;  // F x T
  std::string method;
  nlohmann::json fingerprint = nlohmann::json::object();
  // Method-specific extras, e.g. "phi0" for Kernel SHAP.
  nlohmann::json metadata = nlohmann::json::object();
};

struct ExplainerConfig {
  Method method = Method::kSaliency;
  segperturb::SegmentationKind segmentation =
      segperturb::SegmentationKind::kUniform;
  std::size_t segments_per_channel = 8;
  segperturb::Perturbation perturbation = segperturb::Perturbation::kZero;
  std::size_t neighborhood = 128;
  double kernel_width = 0.25;  // LIME, Hamming-fraction units
  double ridge = 1e-3;         // LIME
  ShapKernel shap_kernel = ShapKernel::kStandard;
  std::size_t layer_index = 0;  // Grad-CAM, model layer index
  double beta = 0.0;
  double sigma = 0.0;
  double epsilon = 1e-9;  // LRP
  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range parameters.
  void Validate() const;
  // Short human-readable row label, e.g. "LIME" or "Grad-CAM".
  std::string Label() const;
  // Perturbation column for report tables ("-" for gradient methods).
  std::string PerturbationLabel() const;
  // Only the parameters relevant for `method`.
  nlohmann::json Fingerprint() const;
  nlohmann::json ToJson() const;
  static ExplainerConfig FromJson(const nlohmann::json& doc);
};

// ---------------------------------------------------------------------------
// Gradient-based methods.

AttributionMap Saliency(const tsmodel::Model& model, const Matrix& x);

// Pre-ReLU parts of the Grad-CAM heat map at feature-map resolution.
//   global[t]     = sum_k g_k A_k[t],       g_k = mean_t dy/dA_k[t]
//   time[t]       = sum_k dy/dA_k[t] A_k[t]
//   channel[f][t] = sum_k g_k F rho_k(f) A_k[t]
// rho_k(f) is the row-normalised channel correspondence of feature map k to
// input channel f, the product of absolute kernel sums of the conv layers up
// to the addressed one.
struct GradCamComponents {
  Matrix global;   // 1 x T_A
  Matrix time;     // 1 x T_A
  Matrix channel;  // F x T_A
  Matrix correspondence;  // K x F, rows sum to 1
};

GradCamComponents ComputeGradCamComponents(const tsmodel::Model& model,
                                           const Matrix& x,
                                           std::size_t layer_index);

// global + beta * time + sigma * channel per row, before the ReLU.
Matrix CombineGradCam(const GradCamComponents& parts, double beta,
                      double sigma);

// Linear interpolation of every row to `length` columns (end points
// aligned). Identity when the lengths agree.
Matrix InterpolateRows(const Matrix& m, std::size_t length);

AttributionMap GradCam(const tsmodel::Model& model, const Matrix& x,
                       std::size_t layer_index, double beta, double sigma);

AttributionMap Lrp(const tsmodel::Model& model, const Matrix& x,
                   double epsilon);

// ---------------------------------------------------------------------------
// Surrogate methods.

// Per-segment coefficients alongside the broadcast map.
struct SurrogateResult {
  AttributionMap map;
  std::vector<double> coefficients;
  double intercept = 0.0;  // LIME intercept (centred) or SHAP phi0
  segperturb::SegmentPartition partition;
};

// Surrogate features are the presence indicators p = 1 - coalition.
SurrogateResult Lime(const tsmodel::Model& model, const Matrix& x,
                     const ExplainerConfig& config,
                     const segperturb::FeatureStats& stats);

// Efficiency is imposed as a constraint: phi0 = f(fully perturbed x) and
// phi0 + sum(phi) = f(x).
SurrogateResult KernelShap(const tsmodel::Model& model, const Matrix& x,
                           const ExplainerConfig& config,
                           const segperturb::FeatureStats& stats);

struct ShapleyValues {
  std::vector<double> phi;
  double baseline = 0.0;    // f(fully perturbed)
  double prediction = 0.0;  // f(x)
};

// Exact enumeration over all 2^M coalitions, M <= 12.
ShapleyValues ExactShapley(const tsmodel::Model& model, const Matrix& x,
                           const segperturb::SegmentPartition& partition,
                           segperturb::Perturbation perturbation,
                           const segperturb::FeatureStats& stats,
                           std::uint64_t seed = 0);

// Copies each segment's value to all its elements.
Matrix BroadcastSegments(const segperturb::SegmentPartition& partition,
                         const std::vector<double>& per_segment);

// ---------------------------------------------------------------------------
// Common interface.

class Explainer {
 public:
  virtual ~Explainer() = default;
  // `seed` feeds every random stream used by this invocation.
  virtual AttributionMap Explain(const Matrix& x, std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
};

// Dispatches on config.method.
class MethodExplainer : public Explainer {
 public:
  MethodExplainer(const tsmodel::Model& model, ExplainerConfig config,
                  segperturb::FeatureStats stats = {});

  AttributionMap Explain(const Matrix& x, std::uint64_t seed) const override;
  std::string name() const override { return config_.Label(); }
  const ExplainerConfig& config() const { return config_; }

 private:
  const tsmodel::Model& model_;
  ExplainerConfig config_;
  segperturb::FeatureStats stats_;
};

// Wraps an arbitrary function; used for reference explainers in tests and
// trend checks.
class FunctionExplainer : public Explainer {
 public:
  using Fn = std::function<Matrix(const Matrix&, std::uint64_t)>;
  FunctionExplainer(std::string name, Fn fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}

  AttributionMap Explain(const Matrix& x, std::uint64_t seed) const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

// ---------------------------------------------------------------------------
// Export.

// F rows x T columns, 17 significant digits.
void WriteMapCsv(const AttributionMap& map, const std::string& path);
// Binary 8-bit PGM, min-max scaled per map (a constant map is all zero), and
// a JSON sidecar with the scaling and the fingerprint.
void WriteMapPgm(const AttributionMap& map, const std::string& pgm_path,
                 const std::string& sidecar_path);

}  // namespace tsxai::attribution

#endif  // TSXAI_ATTRIBUTION_H_
