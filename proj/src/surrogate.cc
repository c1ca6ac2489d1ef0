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

// LIME and Kernel SHAP over segment coalitions, plus the exact Shapley
// enumeration used as their reference.

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tsxai/attribution.h"
#include "tsxai/errors.h"
#include "tsxai/random.h"

namespace tsxai::attribution {

using segperturb::Coalition;
using segperturb::FeatureStats;
using segperturb::SegmentPartition;
using tsmodel::Model;

namespace {

constexpr std::uint64_t kCoalitionPurpose = 0xC0A1;
constexpr std::uint64_t kNoisePurpose = 0x9015E;
// Reciprocal condition number below which a system is rejected.
constexpr double kMinRcond = 1e-13;

Coalition MaskToCoalition(std::uint64_t mask, std::size_t m) {
  Coalition c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = (mask >> i) & 1U;
  return c;
}

std::size_t CountPerturbed(const Coalition& c) {
  std::size_t n = 0;
  for (auto b : c) n += b;
  return n;
}

Eigen::VectorXd SolveSymmetric(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& b, const char* what) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kMinRcond)) {
    throw NumericalError(std::string(what) +
                         ": normal equations are singular or ill-conditioned");
  }
  Eigen::VectorXd sol = ldlt.solve(b);
  if (!sol.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite solution");
  }
  return sol;
}

AttributionMap MakeMap(const SegmentPartition& partition,
                       const std::vector<double>& coefficients,
                       const ExplainerConfig& config) {
  AttributionMap map;
  map.values = BroadcastSegments(partition, coefficients);
  map.method = ToString(config.method);
  map.fingerprint = config.Fingerprint();
  return map;
}

}  // namespace

Matrix BroadcastSegments(const SegmentPartition& partition,
                         const std::vector<double>& per_segment) {
  if (per_segment.size() != partition.size()) {
    throw ShapeError("one value per segment required");
  }
  Matrix out(partition.channels, partition.length);
  for (std::size_t s = 0; s < partition.size(); ++s) {
    const segperturb::Segment& seg = partition.segments[s];
    for (std::size_t t = seg.start; t < seg.end; ++t) {
      out(seg.channel, t) = per_segment[s];
    }
  }
  return out;
}

SurrogateResult Lime(const Model& model, const Matrix& x,
                     const ExplainerConfig& config, const FeatureStats& stats) {
  config.Validate();
  SurrogateResult result;
  result.partition =
      segperturb::MakePartition(config.segmentation, x, config.segments_per_channel);
  const std::size_t m = result.partition.size();
  if (config.neighborhood < m + 2) {
    throw InvalidArgument("LIME neighborhood " +
                          std::to_string(config.neighborhood) +
                          " is smaller than segments + 2 = " +
                          std::to_string(m + 2));
  }

  RandomEngine coalition_rng = MakeEngine(config.seed, 0, kCoalitionPurpose);
  RandomEngine noise_rng = MakeEngine(config.seed, 0, kNoisePurpose);
  std::vector<Coalition> coalitions;
  if (m < 63 && (std::uint64_t{1} << m) <= config.neighborhood) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      coalitions.push_back(MaskToCoalition(mask, m));
    }
  } else {
    coalitions =
        segperturb::SampleCoalitions(m, config.neighborhood, coalition_rng);
  }

  const double reference = tsmodel::Predict(model, x);
  const std::size_t n = coalitions.size();
  Eigen::MatrixXd design(n, m + 1);
  Eigen::VectorXd target(n), weight(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Coalition& z = coalitions[j];
    const Matrix xp = segperturb::Perturb(x, result.partition, z,
                                          config.perturbation, stats, noise_rng);
    target(j) = tsmodel::Predict(model, xp) - reference;
    const double d =
        static_cast<double>(CountPerturbed(z)) / static_cast<double>(m);
    weight(j) = std::exp(-(d * d) / (config.kernel_width * config.kernel_width));
    design(j, 0) = 1.0;
    for (std::size_t i = 0; i < m; ++i) design(j, i + 1) = z[i] ? 0.0 : 1.0;
  }

  const Eigen::MatrixXd weighted = design.transpose() * weight.asDiagonal();
  Eigen::MatrixXd normal = weighted * design;
  for (std::size_t i = 1; i <= m; ++i) normal(i, i) += config.ridge;
  const Eigen::VectorXd sol =
      SolveSymmetric(normal, weighted * target, "LIME");

  result.intercept = sol(0);
  result.coefficients.assign(sol.data() + 1, sol.data() + 1 + m);
  result.map = MakeMap(result.partition, result.coefficients, config);
  result.map.metadata = {{"intercept", result.intercept},
                         {"reference_prediction", reference},
                         {"coalitions", n}};
  return result;
}

SurrogateResult KernelShap(const Model& model, const Matrix& x,
                           const ExplainerConfig& config,
                           const FeatureStats& stats) {
  config.Validate();
  SurrogateResult result;
  result.partition =
      segperturb::MakePartition(config.segmentation, x, config.segments_per_channel);
  const std::size_t m = result.partition.size();
  if (m < 2) throw InvalidArgument("Kernel SHAP needs at least 2 segments");
  if (config.neighborhood < m + 2) {
    throw InvalidArgument("SHAP neighborhood " +
                          std::to_string(config.neighborhood) +
                          " is smaller than segments + 2 = " +
                          std::to_string(m + 2));
  }

  RandomEngine coalition_rng = MakeEngine(config.seed, 0, kCoalitionPurpose);
  RandomEngine noise_rng = MakeEngine(config.seed, 0, kNoisePurpose);

  const double fx = tsmodel::Predict(model, x);
  const double baseline = tsmodel::Predict(
      model, segperturb::Perturb(x, result.partition, Coalition(m, 1),
                                 config.perturbation, stats, noise_rng));
  const double delta = fx - baseline;

  std::vector<Coalition> coalitions;
  if (m < 63 && (std::uint64_t{1} << m) - 2 <= config.neighborhood) {
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << m); ++mask) {
      coalitions.push_back(MaskToCoalition(mask, m));
    }
  } else {
    std::bernoulli_distribution bit(0.5);
    while (coalitions.size() < config.neighborhood) {
      Coalition z(m);
      for (auto& b : z) b = bit(coalition_rng) ? 1 : 0;
      const std::size_t perturbed = CountPerturbed(z);
      if (perturbed == 0 || perturbed == m) continue;
      coalitions.push_back(std::move(z));
    }
  }

  // g(z) = phi0 + sum_i phi_i z_i with z = presence; the last coefficient is
  // eliminated through sum(phi) = delta.
  const std::size_t n = coalitions.size();
  Eigen::MatrixXd design(n, m - 1);
  Eigen::VectorXd target(n), weight(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Coalition& c = coalitions[j];
    const Matrix xp = segperturb::Perturb(x, result.partition, c,
                                          config.perturbation, stats, noise_rng);
    const double y = tsmodel::Predict(model, xp);
    const std::size_t present = m - CountPerturbed(c);
    weight(j) = ShapKernelWeight(config.shap_kernel, m, present);
    const double z_last = c[m - 1] ? 0.0 : 1.0;
    target(j) = y - baseline - z_last * delta;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      design(j, i) = (c[i] ? 0.0 : 1.0) - z_last;
    }
  }
  weight /= weight.maxCoeff();

  const Eigen::MatrixXd weighted = design.transpose() * weight.asDiagonal();
  const Eigen::VectorXd sol =
      SolveSymmetric(weighted * design, weighted * target, "Kernel SHAP");

  result.coefficients.assign(sol.data(), sol.data() + (m - 1));
  double partial = 0.0;
  for (double v : result.coefficients) partial += v;
  result.coefficients.push_back(delta - partial);
  result.intercept = baseline;
  result.map = MakeMap(result.partition, result.coefficients, config);
  result.map.metadata = {{"phi0", baseline},
                         {"prediction", fx},
                         {"coalitions", n}};
  return result;
}

ShapleyValues ExactShapley(const Model& model, const Matrix& x,
                           const SegmentPartition& partition,
                           segperturb::Perturbation perturbation,
                           const FeatureStats& stats, std::uint64_t seed) {
  const std::size_t m = partition.size();
  if (m < 1 || m > 12) {
    throw InvalidArgument("exact Shapley enumeration supports 1..12 segments");
  }
  RandomEngine rng = MakeEngine(seed, 0, kNoisePurpose);
  const std::size_t full = std::size_t{1} << m;
  // value[mask]: prediction with the segments in `mask` present.
  std::vector<double> value(full);
  for (std::size_t mask = 0; mask < full; ++mask) {
    Coalition c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = ((mask >> i) & 1U) ? 0 : 1;
    value[mask] = tsmodel::Predict(
        model, segperturb::Perturb(x, partition, c, perturbation, stats, rng));
  }
  std::vector<double> factorial(m + 1, 1.0);
  for (std::size_t i = 1; i <= m; ++i) {
    factorial[i] = factorial[i - 1] * static_cast<double>(i);
  }

  ShapleyValues out;
  out.phi.assign(m, 0.0);
  out.baseline = value[0];
  out.prediction = value[full - 1];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      const std::size_t s = static_cast<std::size_t>(std::popcount(mask));
      const double w = factorial[s] * factorial[m - s - 1] / factorial[m];
      out.phi[i] += w * (value[mask | bit] - value[mask]);
    }
  }
  return out;
}

}  // namespace tsxai::attribution
