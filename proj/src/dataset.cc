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

#include "tsxai/dataset.h"

#include <cmath>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "tsxai/errors.h"
#include "tsxai/random.h"

namespace tsxai::dataset {

using nlohmann::json;

namespace {
constexpr std::uint64_t kFleetStream = 0xF1EE7ULL;
constexpr std::uint64_t kUnitPurpose = 1;
}  // namespace

void FleetConfig::Validate() const {
  if (n_units < 1) throw InvalidArgument("n_units must be >= 1");
  if (channels < 1) throw InvalidArgument("channels must be >= 1");
  if (informative_channels > channels) {
    throw InvalidArgument("informative_channels exceeds channels");
  }
  if (life_min < 1 || life_max < life_min) {
    throw InvalidArgument("life range must satisfy 1 <= life_min <= life_max");
  }
  if (steps_per_cycle < 1) throw InvalidArgument("steps_per_cycle must be >= 1");
  if (noise < 0.0 || !std::isfinite(noise)) {
    throw InvalidArgument("noise must be finite and >= 0");
  }
  if (!std::isfinite(drift) || !std::isfinite(drift_exponent) ||
      drift_exponent <= 0.0) {
    throw InvalidArgument("drift must be finite, drift_exponent > 0");
  }
  if (baseline_spread < 0.0) {
    throw InvalidArgument("baseline_spread must be >= 0");
  }
}

json FleetConfig::ToJson() const {
  return {{"n_units", n_units},
          {"channels", channels},
          {"informative_channels", informative_channels},
          {"life_min", life_min},
          {"life_max", life_max},
          {"steps_per_cycle", steps_per_cycle},
          {"drift", drift},
          {"drift_exponent", drift_exponent},
          {"noise", noise},
          {"baseline_spread", baseline_spread}};
}

FleetConfig FleetConfig::FromJson(const json& doc) {
  FleetConfig c;
  c.n_units = doc.value("n_units", c.n_units);
  c.channels = doc.value("channels", c.channels);
  c.informative_channels =
      doc.value("informative_channels", c.informative_channels);
  c.life_min = doc.value("life_min", c.life_min);
  c.life_max = doc.value("life_max", c.life_max);
  c.steps_per_cycle = doc.value("steps_per_cycle", c.steps_per_cycle);
  c.drift = doc.value("drift", c.drift);
  c.drift_exponent = doc.value("drift_exponent", c.drift_exponent);
  c.noise = doc.value("noise", c.noise);
  c.baseline_spread = doc.value("baseline_spread", c.baseline_spread);
  return c;
}

std::vector<UnitHistory> GenerateFleet(const FleetConfig& config,
                                       std::uint64_t seed) {
  config.Validate();
  const int informative = config.informative_channels < 0
                              ? config.channels
                              : config.informative_channels;
  // Fleet-wide degradation scale per channel.
  RandomEngine fleet_rng = MakeEngine(seed, kFleetStream);
  std::uniform_real_distribution<double> scale_dist(0.5, 1.5);
  std::vector<double> channel_drift(config.channels, 0.0);
  for (int f = 0; f < informative; ++f) {
    channel_drift[f] = config.drift * scale_dist(fleet_rng);
  }

  std::vector<UnitHistory> fleet;
  fleet.reserve(config.n_units);
  for (int u = 0; u < config.n_units; ++u) {
    RandomEngine rng = MakeEngine(seed, static_cast<std::uint64_t>(u),
                                  kUnitPurpose);
    std::uniform_int_distribution<int> life_dist(config.life_min,
                                                 config.life_max);
    std::uniform_real_distribution<double> base_dist(-config.baseline_spread,
                                                     config.baseline_spread);
    std::normal_distribution<double> noise_dist(0.0, 1.0);

    UnitHistory unit;
    unit.unit_id = u;
    const int life = life_dist(rng);
    unit.total_useful_life = life;
    const int steps = life * config.steps_per_cycle;
    std::vector<double> baseline(config.channels);
    for (double& b : baseline) {
      b = config.baseline_spread > 0.0 ? base_dist(rng) : 0.0;
    }
    unit.channels = Matrix(config.channels, steps);
    unit.cycle.resize(steps);
    for (int t = 0; t < steps; ++t) {
      unit.cycle[t] = static_cast<double>(t / config.steps_per_cycle);
    }
    for (int f = 0; f < config.channels; ++f) {
      for (int t = 0; t < steps; ++t) {
        const double progress = unit.cycle[t] / unit.total_useful_life;
        double v = baseline[f] +
                   channel_drift[f] * std::pow(progress, config.drift_exponent);
        if (config.noise > 0.0) v += config.noise * noise_dist(rng);
        unit.channels(f, t) = v;
      }
    }
    fleet.push_back(std::move(unit));
  }
  return fleet;
}

// ---------------------------------------------------------------------------

json NormalizationStats::ToJson() const {
  return {{"mean", mean}, {"std", stddev}, {"degenerate", degenerate}};
}

NormalizationStats NormalizationStats::FromJson(const json& doc) {
  NormalizationStats s;
  s.mean = doc.at("mean").get<std::vector<double>>();
  s.stddev = doc.at("std").get<std::vector<double>>();
  s.degenerate = doc.value("degenerate", std::vector<int>{});
  if (s.mean.size() != s.stddev.size()) {
    throw ParseError("normalization stats: mean/std length mismatch");
  }
  return s;
}

NormalizationStats ZScoreFit(const std::vector<Matrix>& data) {
  if (data.empty() || data.front().empty()) {
    throw InvalidArgument("cannot fit normalization on empty data");
  }
  const std::size_t features = data.front().rows();
  NormalizationStats stats;
  stats.mean.assign(features, 0.0);
  stats.stddev.assign(features, 0.0);
  for (std::size_t f = 0; f < features; ++f) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const Matrix& m : data) {
      if (m.rows() != features) throw ShapeError("feature count mismatch");
      for (double v : m.row(f)) sum += v;
      n += m.cols();
    }
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const Matrix& m : data) {
      for (double v : m.row(f)) sq += (v - mean) * (v - mean);
    }
    double sd = std::sqrt(sq / static_cast<double>(n));
    if (sd == 0.0) {
      std::cerr << "warning: feature " << f
                << " has zero variance; using std = 1\n";
      stats.degenerate.push_back(static_cast<int>(f));
      sd = 1.0;
    }
    stats.mean[f] = mean;
    stats.stddev[f] = sd;
  }
  return stats;
}

NormalizationStats ZScoreFit(const std::vector<UnitHistory>& histories) {
  std::vector<Matrix> data;
  data.reserve(histories.size());
  for (const UnitHistory& h : histories) data.push_back(h.channels);
  return ZScoreFit(data);
}

Matrix ZScoreApply(const NormalizationStats& stats, const Matrix& data) {
  if (data.rows() != stats.mean.size()) {
    throw ShapeError("normalization stats do not match feature count");
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t f = 0; f < data.rows(); ++f) {
    for (std::size_t t = 0; t < data.cols(); ++t) {
      out(f, t) = (data(f, t) - stats.mean[f]) / stats.stddev[f];
    }
  }
  return out;
}

Matrix ZScoreInverse(const NormalizationStats& stats, const Matrix& data) {
  if (data.rows() != stats.mean.size()) {
    throw ShapeError("normalization stats do not match feature count");
  }
  Matrix out(data.rows(), data.cols());
  for (std::size_t f = 0; f < data.rows(); ++f) {
    for (std::size_t t = 0; t < data.cols(); ++t) {
      out(f, t) = data(f, t) * stats.stddev[f] + stats.mean[f];
    }
  }
  return out;
}

UnitHistory ZScoreApply(const NormalizationStats& stats,
                        const UnitHistory& history) {
  UnitHistory out = history;
  out.channels = ZScoreApply(stats, history.channels);
  return out;
}

std::vector<Sample> SlidingWindows(const UnitHistory& history, int window) {
  const int steps = static_cast<int>(history.steps());
  if (window < 1) throw InvalidArgument("window length must be >= 1");
  if (window > steps) {
    throw InvalidArgument("window length " + std::to_string(window) +
                          " exceeds unit " + std::to_string(history.unit_id) +
                          " length " + std::to_string(steps));
  }
  const std::size_t features = history.channels.rows();
  std::vector<Sample> out;
  out.reserve(steps - window);
  for (int t_end = window; t_end < steps; ++t_end) {
    Sample s;
    s.x = Matrix(features, window);
    const int first = t_end - window + 1;
    for (std::size_t f = 0; f < features; ++f) {
      for (int t = 0; t < window; ++t) {
        s.x(f, t) = history.channels(f, first + t);
      }
    }
    s.y = history.total_useful_life - history.cycle[t_end];
    s.unit_id = history.unit_id;
    s.t_end = t_end;
    out.push_back(std::move(s));
  }
  return out;
}

double Rmse(const std::vector<PredictionPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("rmse of empty input");
  double acc = 0.0;
  for (const auto& p : pairs) {
    const double e = p.label - p.prediction;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

double NasaScore(const std::vector<PredictionPair>& pairs) {
  if (pairs.empty()) throw InvalidArgument("NASA score of empty input");
  double acc = 0.0;
  for (const auto& p : pairs) {
    const double alpha = p.prediction < p.label ? 1.0 / 13.0 : 1.0 / 10.0;
    acc += std::exp(alpha * std::abs(p.label - p.prediction)) - 1.0;
  }
  return acc / static_cast<double>(pairs.size());
}

double CombinedScore(const std::vector<PredictionPair>& pairs) {
  return 0.5 * Rmse(pairs) + 0.5 * NasaScore(pairs);
}

}  // namespace tsxai::dataset
