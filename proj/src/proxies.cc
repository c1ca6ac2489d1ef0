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

#include "tsxai/proxies.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "tsxai/errors.h"
#include "tsxai/random.h"

namespace tsxai::proxies {

using attribution::Explainer;
using nlohmann::json;
using tsmodel::Model;

namespace {

constexpr double kIdentityTolerance = 1e-12;

// Purpose tags for per-sample seed derivation.
constexpr std::uint64_t kExplainPurpose = 1;
constexpr std::uint64_t kRepeatPurpose = 2;
constexpr std::uint64_t kAcumenPurpose = 3;

std::vector<double> Importance(const Matrix& map, bool use_abs) {
  std::vector<double> v(map.values().begin(), map.values().end());
  if (use_abs) {
    for (double& e : v) e = std::abs(e);
  }
  return v;
}

// Flat indices ordered by importance, descending; ties keep index order.
std::vector<std::size_t> DescendingOrder(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return order;
}

double Mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : tsxai::Mean(v);
}

}  // namespace

void ProxyOptions::Validate() const {
  if (group_size < 1) throw ConfigError("group_size must be >= 1");
  if (!(threshold_factor >= 0.0)) {
    throw ConfigError("threshold_factor must be >= 0");
  }
  if (max_features < 1) throw ConfigError("max_features must be >= 1");
}

json ProxyOptions::ToJson() const {
  return {{"group_size", group_size},
          {"threshold_factor", threshold_factor},
          {"max_features", max_features},
          {"abs_importance", abs_importance},
          {"seed", seed}};
}

ProxyOptions ProxyOptions::FromJson(const json& doc) {
  ProxyOptions o;
  try {
    o.group_size = doc.value("group_size", o.group_size);
    o.threshold_factor = doc.value("threshold_factor", o.threshold_factor);
    o.max_features = doc.value("max_features", o.max_features);
    o.abs_importance = doc.value("abs_importance", o.abs_importance);
    o.seed = doc.value("seed", o.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("proxy options: ") + e.what());
  }
  o.Validate();
  return o;
}

ImportantFeatureSet SelectImportant(const Matrix& map,
                                    const ProxyOptions& options) {
  if (!AllFinite(map.values())) {
    throw InvalidArgument("attribution map has non-finite values");
  }
  const std::vector<double> v = Importance(map, options.abs_importance);
  ImportantFeatureSet set;
  set.threshold = options.threshold_factor * PopulationStdDev(v);
  for (std::size_t idx : DescendingOrder(v)) {
    if (!(v[idx] > set.threshold)) break;
    if (set.members.size() == options.max_features) break;
    set.members.push_back({idx / map.cols(), idx % map.cols(), v[idx]});
  }
  return set;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double SpearmanCorrelation(std::span<const double> a, std::span<const double> b,
                           bool* degenerate) {
  if (a.size() != b.size()) throw ShapeError("Spearman inputs differ in size");
  if (degenerate) *degenerate = false;
  const std::vector<double> ra = AverageRanks(a);
  const std::vector<double> rb = AverageRanks(b);
  const double ma = tsxai::Mean(ra);
  const double mb = tsxai::Mean(rb);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

double IdentityProxy(const Explainer& explainer,
                     const std::vector<Matrix>& samples, std::uint64_t seed) {
  if (samples.empty()) throw InvalidArgument("identity needs >= 1 sample");
  std::size_t same = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix a =
        explainer.Explain(samples[i], DeriveSeed(seed, i, kExplainPurpose)).values;
    const Matrix b =
        explainer.Explain(samples[i], DeriveSeed(seed, i, kRepeatPurpose)).values;
    if (EuclideanDistance(a, b) <= kIdentityTolerance) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(samples.size());
}

double SeparabilityProxy(const std::vector<Matrix>& samples,
                         const std::vector<Matrix>& explanations) {
  if (samples.size() != explanations.size()) {
    throw ShapeError("one explanation per sample required");
  }
  std::size_t pairs = 0;
  std::size_t separated = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      if (EuclideanDistance(samples[i], samples[j]) == 0.0) continue;
      ++pairs;
      if (EuclideanDistance(explanations[i], explanations[j]) > 0.0) {
        ++separated;
      }
    }
  }
  if (pairs == 0) {
    throw InvalidArgument("separability needs at least two distinct samples");
  }
  return static_cast<double>(separated) / static_cast<double>(pairs);
}

StabilityResult StabilityProxy(const std::vector<Matrix>& samples,
                               const std::vector<Matrix>& explanations) {
  const std::size_t n = samples.size();
  if (n != explanations.size()) {
    throw ShapeError("one explanation per sample required");
  }
  if (n < 3) throw InvalidArgument("stability needs >= 3 samples");
  Matrix dx(n, n), de(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dx(i, j) = dx(j, i) = EuclideanDistance(samples[i], samples[j]);
      de(i, j) = de(j, i) = EuclideanDistance(explanations[i], explanations[j]);
    }
  }
  StabilityResult result;
  double total = 0.0;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < n; ++i) {
    a.clear();
    b.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      a.push_back(dx(i, j));
      b.push_back(de(i, j));
    }
    bool degenerate = false;
    total += SpearmanCorrelation(a, b, &degenerate);
    if (degenerate) ++result.degenerate;
  }
  result.score = total / static_cast<double>(n);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> SelectivityCurve(
    const Model& model, const Matrix& map, const Matrix& x, double label,
    const ProxyOptions& options) {
  if (!map.SameShape(x)) throw ShapeError("map and sample shapes differ");
  if (options.group_size < 1) throw InvalidArgument("group_size must be >= 1");
  const std::vector<std::size_t> order =
      DescendingOrder(Importance(map, options.abs_importance));
  const std::size_t total = order.size();

  std::vector<double> fraction{0.0};
  std::vector<double> error{std::abs(label - tsmodel::Predict(model, x))};
  Matrix current = x;
  for (std::size_t begin = 0; begin < total; begin += options.group_size) {
    const std::size_t end = std::min(begin + options.group_size, total);
    for (std::size_t k = begin; k < end; ++k) current[order[k]] = 0.0;
    fraction.push_back(static_cast<double>(end) / static_cast<double>(total));
    error.push_back(std::abs(label - tsmodel::Predict(model, current)));
  }

  const double e0 = error.front();
  const double range = *std::max_element(error.begin(), error.end()) - e0;
  std::vector<std::pair<double, double>> curve;
  for (std::size_t j = 0; j < error.size(); ++j) {
    curve.emplace_back(fraction[j], range > 0.0 ? (error[j] - e0) / range : 0.0);
  }
  return curve;
}

double TrapezoidArea(const std::vector<std::pair<double, double>>& curve) {
  double area = 0.0;
  for (std::size_t j = 1; j < curve.size(); ++j) {
    area += 0.5 * (curve[j].second + curve[j - 1].second) *
            (curve[j].first - curve[j - 1].first);
  }
  return area;
}

double SelectivityProxy(const Model& model, const Matrix& map, const Matrix& x,
                        double label, const ProxyOptions& options) {
  return TrapezoidArea(SelectivityCurve(model, map, x, label, options));
}

Matrix ZeroPositions(const Matrix& x, const ImportantFeatureSet& set) {
  Matrix out = x;
  for (const ImportantFeature& f : set.members) out(f.channel, f.time) = 0.0;
  return out;
}

Matrix KeepPositions(const Matrix& x, const ImportantFeatureSet& set) {
  Matrix out(x.rows(), x.cols());
  for (const ImportantFeature& f : set.members) {
    out(f.channel, f.time) = x(f.channel, f.time);
  }
  return out;
}

CoherenceResult CoherenceProxy(const Model& model, const Matrix& map,
                               const Matrix& x, double label,
                               const ProxyOptions& options) {
  if (!map.SameShape(x)) throw ShapeError("map and sample shapes differ");
  const ImportantFeatureSet set = SelectImportant(map, options);
  CoherenceResult r;
  r.empty_set = set.members.empty();
  r.prediction_error = std::abs(label - tsmodel::Predict(model, x));
  r.explanation_error =
      std::abs(label - tsmodel::Predict(model, KeepPositions(x, set)));
  r.alpha = std::abs(r.prediction_error - r.explanation_error);
  return r;
}

std::optional<double> Completeness(const CoherenceResult& coherence) {
  if (coherence.prediction_error == 0.0) return std::nullopt;
  return coherence.explanation_error / coherence.prediction_error;
}

double Congruency(std::span<const double> coherences) {
  if (coherences.empty()) throw InvalidArgument("congruency of no samples");
  return PopulationStdDev(coherences);
}

double AcumenFromPositions(std::span<const double> positions,
                           std::size_t total) {
  if (positions.empty() || total == 0) {
    throw InvalidArgument("acumen needs a non-empty important set");
  }
  double sum = 0.0;
  for (double p : positions) sum += p / static_cast<double>(total);
  return 1.0 - sum / static_cast<double>(positions.size());
}

std::optional<double> AcumenProxy(const Explainer& explainer, const Matrix& map,
                                  const Matrix& x, std::uint64_t seed,
                                  const ProxyOptions& options) {
  const ImportantFeatureSet set = SelectImportant(map, options);
  if (set.members.empty()) return std::nullopt;
  const Matrix perturbed = ZeroPositions(x, set);
  const Matrix after = explainer.Explain(perturbed, seed).values;
  const std::vector<double> ranks =
      AverageRanks(Importance(after, options.abs_importance));
  std::vector<double> positions;
  positions.reserve(set.members.size());
  for (const ImportantFeature& f : set.members) {
    positions.push_back(ranks[f.channel * x.cols() + f.time] - 1.0);
  }
  return AcumenFromPositions(positions, x.size());
}

// ---------------------------------------------------------------------------

json ProxyReport::ToJson() const {
  auto opt = [](const std::optional<double>& v) -> json {
    return v ? json(*v) : json(nullptr);
  };
  return {{"method", method},
          {"perturbation", perturbation},
          {"fingerprint", fingerprint},
          {"n", n},
          {"identity", opt(identity)},
          {"separability", opt(separability)},
          {"stability", opt(stability)},
          {"selectivity", opt(selectivity)},
          {"coherence", opt(coherence)},
          {"completeness", opt(completeness)},
          {"congruency", opt(congruency)},
          {"acumen", opt(acumen)},
          {"stability_degenerate", stability_degenerate},
          {"empty_important_sets", empty_important_sets},
          {"completeness_skipped", completeness_skipped},
          {"acumen_skipped", acumen_skipped},
          {"errors", errors}};
}

ProxyReport EvaluateAll(const Model& model, const Explainer& explainer,
                        const std::vector<dataset::Sample>& samples,
                        const ProxyOptions& options,
                        const EvaluationPlan& plan) {
  options.Validate();
  if (samples.empty()) throw InvalidArgument("no samples to evaluate");
  ProxyReport report;
  report.method = explainer.name();

  std::vector<std::size_t> ok;  // indices explained successfully
  std::vector<Matrix> xs, maps;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      attribution::AttributionMap m = explainer.Explain(
          samples[i].x, DeriveSeed(options.seed, i, kExplainPurpose));
      if (!AllFinite(m.values.values())) {
        throw NumericalError("non-finite attribution");
      }
      if (ok.empty()) report.fingerprint = m.fingerprint;
      ok.push_back(i);
      xs.push_back(samples[i].x);
      maps.push_back(std::move(m.values));
    } catch (const Error& e) {
      report.errors.push_back("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  report.n = ok.size();
  if (ok.empty()) return report;

  if (plan.identity) {
    std::size_t same = 0, tried = 0;
    for (std::size_t k = 0; k < ok.size(); ++k) {
      try {
        const Matrix again =
            explainer
                .Explain(xs[k], DeriveSeed(options.seed, ok[k], kRepeatPurpose))
                .values;
        ++tried;
        if (EuclideanDistance(maps[k], again) <= kIdentityTolerance) ++same;
      } catch (const Error& e) {
        report.errors.push_back("identity, sample " + std::to_string(ok[k]) +
                                ": " + e.what());
      }
    }
    if (tried > 0) {
      report.identity = static_cast<double>(same) / static_cast<double>(tried);
    }
  }
  if (plan.separability) {
    try {
      report.separability = SeparabilityProxy(xs, maps);
    } catch (const InvalidArgument&) {
      // Fewer than two distinct samples: undefined.
    }
  }
  if (plan.stability && xs.size() >= 3) {
    const StabilityResult s = StabilityProxy(xs, maps);
    report.stability = s.score;
    report.stability_degenerate = s.degenerate;
  }

  std::vector<double> selectivity, alpha, gamma, acumen;
  for (std::size_t k = 0; k < ok.size(); ++k) {
    const dataset::Sample& sample = samples[ok[k]];
    try {
      if (plan.selectivity) {
        selectivity.push_back(
            SelectivityProxy(model, maps[k], xs[k], sample.y, options));
      }
      if (plan.coherence) {
        const CoherenceResult c =
            CoherenceProxy(model, maps[k], xs[k], sample.y, options);
        alpha.push_back(c.alpha);
        if (c.empty_set) ++report.empty_important_sets;
        if (const auto g = Completeness(c)) {
          gamma.push_back(*g);
        } else {
          ++report.completeness_skipped;
        }
      }
      if (plan.acumen) {
        const auto a =
            AcumenProxy(explainer, maps[k], xs[k],
                        DeriveSeed(options.seed, ok[k], kAcumenPurpose), options);
        if (a) {
          acumen.push_back(*a);
        } else {
          ++report.acumen_skipped;
        }
      }
    } catch (const Error& e) {
      report.errors.push_back("sample " + std::to_string(ok[k]) + ": " +
                              e.what());
    }
  }
  if (!selectivity.empty()) report.selectivity = Mean(selectivity);
  if (!alpha.empty()) {
    report.coherence = Mean(alpha);
    report.congruency = Congruency(alpha);
  }
  if (!gamma.empty()) report.completeness = Mean(gamma);
  if (!acumen.empty()) report.acumen = Mean(acumen);
  return report;
}

// ---------------------------------------------------------------------------

std::string ReportCsvHeader() {
  return "Method,Perm,I,Sep,Sta,Sel,Coh,Comp,Cong,Acu";
}

std::string ReportCsvRow(const ProxyReport& r) {
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v == 0.0 ? 0.0 : *v);
    return std::string(buf);
  };
  return r.method + "," + r.perturbation + "," + cell(r.identity) + "," +
         cell(r.separability) + "," + cell(r.stability) + "," +
         cell(r.selectivity) + "," + cell(r.coherence) + "," +
         cell(r.completeness) + "," + cell(r.congruency) + "," +
         cell(r.acumen);
}

void WriteReportsCsv(const std::vector<ProxyReport>& reports,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << ReportCsvHeader() << '\n';
  for (const ProxyReport& r : reports) out << ReportCsvRow(r) << '\n';
}

void WriteReportsJson(const std::vector<ProxyReport>& reports,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  json doc = json::array();
  for (const ProxyReport& r : reports) doc.push_back(r.ToJson());
  out << doc.dump(2) << '\n';
}

}  // namespace tsxai::proxies
