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

// Quantitative proxies for explanation quality: identity, separability,
// stability, selectivity, coherence, completeness, congruency and acumen,
// plus their aggregation over an evaluation set.

#ifndef TSXAI_PROXIES_H_
#define TSXAI_PROXIES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsxai/attribution.h"
#include "tsxai/dataset.h"
#include "tsxai/matrix.h"
#include "tsxai/model.h"

namespace tsxai::proxies {

struct ProxyOptions {
  std::size_t group_size = 10;     // selectivity removal step
  double threshold_factor = 1.5;   // importance > factor * std
  std::size_t max_features = 100;  // cap on the important set
  bool abs_importance = false;     // rank |value| instead of value
  std::uint64_t seed = 0;          // master seed for explainer invocations

  void Validate() const;
  nlohmann::json ToJson() const;
  static ProxyOptions FromJson(const nlohmann::json& doc);
};

struct ImportantFeature {
  std::size_t channel = 0;
  std::size_t time = 0;
  double importance = 0.0;
};

struct ImportantFeatureSet {
  std::vector<ImportantFeature> members;  // descending importance
  double threshold = 0.0;
};

// Positions whose importance exceeds factor * population std of all map
// values, sorted descending (ties by channel, then time), capped.
ImportantFeatureSet SelectImportant(const Matrix& map,
                                    const ProxyOptions& options = {});

// Average (1-based midpoint) ranks, ascending.
std::vector<double> AverageRanks(std::span<const double> values);
// Spearman rank correlation with average ranks. Returns 0 and sets
// *degenerate when either rank vector has zero variance.
double SpearmanCorrelation(std::span<const double> a, std::span<const double> b,
                           bool* degenerate = nullptr);

// ---------------------------------------------------------------------------
// Set-level proxies.

// Fraction of samples whose two explanations (independent invocations with
// distinct seeds) lie within 1e-12 Euclidean distance.
double IdentityProxy(const attribution::Explainer& explainer,
                     const std::vector<Matrix>& samples, std::uint64_t seed);

// Over unordered pairs with non-zero sample distance, the fraction with
// non-zero explanation distance. Throws InvalidArgument when no pair of
// samples differs.
double SeparabilityProxy(const std::vector<Matrix>& samples,
                         const std::vector<Matrix>& explanations);

struct StabilityResult {
  double score = 0.0;
  std::size_t degenerate = 0;  // rho_i forced to 0
};

// Mean over i of Spearman(d(x_i, x_j), d(e_i, e_j)), j != i. Needs >= 3
// samples.
StabilityResult StabilityProxy(const std::vector<Matrix>& samples,
                               const std::vector<Matrix>& explanations);

// ---------------------------------------------------------------------------
// Per-sample proxies.

// Zeroes elements cumulatively in importance order, group by group, and
// integrates the normalised absolute-error curve over the removed fraction.
double SelectivityProxy(const tsmodel::Model& model, const Matrix& map,
                        const Matrix& x, double label,
                        const ProxyOptions& options = {});

// Normalised curve behind SelectivityProxy: (fraction removed, c_j) pairs.
std::vector<std::pair<double, double>> SelectivityCurve(
    const tsmodel::Model& model, const Matrix& map, const Matrix& x,
    double label, const ProxyOptions& options = {});

double TrapezoidArea(const std::vector<std::pair<double, double>>& curve);

struct CoherenceResult {
  double alpha = 0.0;             // |p_e - e_e|
  double prediction_error = 0.0;  // p_e = |y - f(x)|
  double explanation_error = 0.0; // e_e with non-important features zeroed
  bool empty_set = false;         // nothing important: fully zeroed input
};

CoherenceResult CoherenceProxy(const tsmodel::Model& model, const Matrix& map,
                               const Matrix& x, double label,
                               const ProxyOptions& options = {});

// e_e / p_e; nullopt when p_e == 0.
std::optional<double> Completeness(const CoherenceResult& coherence);

// Population standard deviation of the coherences.
double Congruency(std::span<const double> coherences);

// 1 - (sum(positions) / total) / positions.size().
double AcumenFromPositions(std::span<const double> positions,
                           std::size_t total);

// Zeroes the important features of `map`, re-explains and locates them in
// the ascending ranking of the new map. nullopt when the set is empty.
std::optional<double> AcumenProxy(const attribution::Explainer& explainer,
                                  const Matrix& map, const Matrix& x,
                                  std::uint64_t seed,
                                  const ProxyOptions& options = {});

// Matrix with the given positions set to zero.
Matrix ZeroPositions(const Matrix& x, const ImportantFeatureSet& set);
// Matrix with every position outside the set set to zero.
Matrix KeepPositions(const Matrix& x, const ImportantFeatureSet& set);

// ---------------------------------------------------------------------------
// Aggregation.

struct ProxyReport {
  std::string method;
  std::string perturbation = "-";
  nlohmann::json fingerprint = nlohmann::json::object();
  std::size_t n = 0;  // samples explained successfully

  std::optional<double> identity;
  std::optional<double> separability;
  std::optional<double> stability;
  std::optional<double> selectivity;
  std::optional<double> coherence;
  std::optional<double> completeness;
  std::optional<double> congruency;
  std::optional<double> acumen;

  std::size_t stability_degenerate = 0;
  std::size_t empty_important_sets = 0;
  std::size_t completeness_skipped = 0;
  std::size_t acumen_skipped = 0;
  std::vector<std::string> errors;  // per-sample failures, not fatal

  nlohmann::json ToJson() const;
};

struct EvaluationPlan {
  bool identity = true;
  bool separability = true;
  bool stability = true;
  bool selectivity = true;
  bool coherence = true;  // also completeness and congruency
  bool acumen = true;
};

ProxyReport EvaluateAll(const tsmodel::Model& model,
                        const attribution::Explainer& explainer,
                        const std::vector<dataset::Sample>& samples,
                        const ProxyOptions& options,
                        const EvaluationPlan& plan = {});

// Column order: Method, Perm, I, Sep, Sta, Sel, Coh, Comp, Cong, Acu.
std::string ReportCsvHeader();
std::string ReportCsvRow(const ProxyReport& report);
void WriteReportsCsv(const std::vector<ProxyReport>& reports,
                     const std::string& path);
void WriteReportsJson(const std::vector<ProxyReport>& reports,
                      const std::string& path);

}  // namespace tsxai::proxies

#endif  // TSXAI_PROXIES_H_
