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

#include "tsxai/segperturb.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tsxai/errors.h"

namespace tsxai::segperturb {

std::string ToString(SegmentationKind kind) {
  return kind == SegmentationKind::kUniform ? "uniform" : "l2_optimal";
}

SegmentationKind ParseSegmentationKind(const std::string& name) {
  if (name == "uniform") return SegmentationKind::kUniform;
  if (name == "l2_optimal" || name == "l2") return SegmentationKind::kL2Optimal;
  throw InvalidArgument("unknown segmentation '" + name + "'");
}

void SegmentPartition::Validate() const {
  std::size_t expected_channel = 0;
  std::size_t cursor = 0;
  for (const Segment& s : segments) {
    if (s.channel != expected_channel) {
      if (s.channel != expected_channel + 1 || cursor != length) {
        throw InvalidArgument("partition does not cover channel " +
                              std::to_string(expected_channel));
      }
      expected_channel = s.channel;
      cursor = 0;
    }
    if (s.start != cursor || s.end <= s.start || s.end > length) {
      throw InvalidArgument("partition segment is empty or not contiguous");
    }
    cursor = s.end;
  }
  if (channels == 0 || expected_channel + 1 != channels || cursor != length) {
    throw InvalidArgument("partition does not cover every channel");
  }
}

nlohmann::json SegmentPartition::ToJson() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const Segment& s : segments) segs.push_back({s.channel, s.start, s.end});
  return {{"kind", ToString(kind)},
          {"channels", channels},
          {"length", length},
          {"segments", segs}};
}

std::vector<std::size_t> UniformBoundaries(std::size_t length, std::size_t m) {
  if (m < 1 || m > length) {
    throw InvalidArgument("window size must satisfy 1 <= m <= T");
  }
  std::vector<std::size_t> bounds;
  for (std::size_t b = 0; b < length; b += m) bounds.push_back(b);
  bounds.push_back(length);
  return bounds;
}

double SegmentCost(std::span<const double> ts, std::size_t i, std::size_t j) {
  if (!(i < j) || j > ts.size()) {
    throw InvalidArgument("segment range must satisfy 0 <= i < j <= T");
  }
  double mean = 0.0;
  for (std::size_t k = i; k < j; ++k) mean += ts[k];
  mean /= static_cast<double>(j - i);
  double cost = 0.0;
  for (std::size_t k = i; k < j; ++k) {
    const double d = ts[k] - mean;
    cost += d * d;
  }
  return cost;
}

double SegmentationCost(std::span<const double> ts,
                        const std::vector<std::size_t>& boundaries) {
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < boundaries.size(); ++s) {
    total += SegmentCost(ts, boundaries[s], boundaries[s + 1]);
  }
  return total;
}

L2Segmentation L2OptimalSegmentation(std::span<const double> ts,
                                     std::size_t n_segments) {
  const std::size_t length = ts.size();
  if (n_segments < 1 || n_segments > length) {
    throw InvalidArgument("n_segments must satisfy 1 <= n <= T");
  }
  // Prefix sums of the centred series keep cancellation small.
  const double centre = Mean(ts);
  std::vector<double> s1(length + 1, 0.0), s2(length + 1, 0.0);
  for (std::size_t k = 0; k < length; ++k) {
    const double v = ts[k] - centre;
    s1[k + 1] = s1[k] + v;
    s2[k + 1] = s2[k] + v * v;
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    if (j - i == 1) return 0.0;
    const double sum = s1[j] - s1[i];
    const double c = (s2[j] - s2[i]) - sum * sum / static_cast<double>(j - i);
    return c > 0.0 ? c : 0.0;
  };

  // best[n][i]: minimal cost of splitting ts[i, T) into n segments.
  // next[n][i]: smallest first boundary achieving it.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(
      n_segments + 1, std::vector<double>(length + 1, kInf));
  std::vector<std::vector<std::size_t>> next(
      n_segments + 1, std::vector<std::size_t>(length + 1, length));
  for (std::size_t i = 0; i < length; ++i) best[1][i] = cost(i, length);
  for (std::size_t n = 2; n <= n_segments; ++n) {
    for (std::size_t i = 0; i + n <= length; ++i) {
      double b = kInf;
      std::size_t arg = length;
      for (std::size_t j = i + 1; j + (n - 1) <= length; ++j) {
        const double c = cost(i, j) + best[n - 1][j];
        if (c < b) {
          b = c;
          arg = j;
        }
      }
      best[n][i] = b;
      next[n][i] = arg;
    }
  }

  L2Segmentation out;
  out.boundaries.push_back(0);
  std::size_t i = 0;
  for (std::size_t n = n_segments; n >= 2; --n) {
    i = next[n][i];
    out.boundaries.push_back(i);
  }
  out.boundaries.push_back(length);
  out.cost = SegmentationCost(ts, out.boundaries);
  return out;
}

namespace {

void AppendChannel(SegmentPartition* partition, std::size_t channel,
                   const std::vector<std::size_t>& bounds) {
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    partition->segments.push_back({channel, bounds[s], bounds[s + 1]});
  }
}

}  // namespace

SegmentPartition UniformPartition(std::size_t channels, std::size_t length,
                                  std::size_t window) {
  SegmentPartition p;
  p.kind = SegmentationKind::kUniform;
  p.channels = channels;
  p.length = length;
  const std::vector<std::size_t> bounds = UniformBoundaries(length, window);
  for (std::size_t f = 0; f < channels; ++f) AppendChannel(&p, f, bounds);
  return p;
}

SegmentPartition L2OptimalPartition(const Matrix& x, std::size_t n_segments) {
  SegmentPartition p;
  p.kind = SegmentationKind::kL2Optimal;
  p.channels = x.rows();
  p.length = x.cols();
  for (std::size_t f = 0; f < x.rows(); ++f) {
    AppendChannel(&p, f, L2OptimalSegmentation(x.row(f), n_segments).boundaries);
  }
  return p;
}

SegmentPartition MakePartition(SegmentationKind kind, const Matrix& x,
                               std::size_t segments_per_channel) {
  if (segments_per_channel < 1 || segments_per_channel > x.cols()) {
    throw InvalidArgument("segments per channel must be in [1, T]");
  }
  if (kind == SegmentationKind::kL2Optimal) {
    return L2OptimalPartition(x, segments_per_channel);
  }
  const std::size_t window =
      (x.cols() + segments_per_channel - 1) / segments_per_channel;
  return UniformPartition(x.rows(), x.cols(), window);
}

// ---------------------------------------------------------------------------

std::string ToString(Perturbation p) {
  switch (p) {
    case Perturbation::kZero:
      return "zero";
    case Perturbation::kOne:
      return "one";
    case Perturbation::kMean:
      return "mean";
    case Perturbation::kUniformNoise:
      return "uniform_noise";
    case Perturbation::kNormalNoise:
      return "normal_noise";
  }
  return "unknown";
}

Perturbation ParsePerturbation(const std::string& name) {
  if (name == "zero") return Perturbation::kZero;
  if (name == "one") return Perturbation::kOne;
  if (name == "mean") return Perturbation::kMean;
  if (name == "uniform_noise") return Perturbation::kUniformNoise;
  if (name == "normal_noise") return Perturbation::kNormalNoise;
  throw InvalidArgument("unknown perturbation '" + name + "'");
}

bool IsStochastic(Perturbation p) {
  return p == Perturbation::kUniformNoise || p == Perturbation::kNormalNoise;
}

FeatureStats FeatureStats::FromSamples(const std::vector<Matrix>& samples) {
  if (samples.empty()) throw InvalidArgument("no samples for feature stats");
  const std::size_t features = samples.front().rows();
  FeatureStats s;
  s.mean.assign(features, 0.0);
  s.stddev.assign(features, 0.0);
  s.min.assign(features, std::numeric_limits<double>::infinity());
  s.max.assign(features, -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < features; ++f) {
    std::vector<double> values;
    for (const Matrix& m : samples) {
      if (m.rows() != features) throw ShapeError("feature count mismatch");
      values.insert(values.end(), m.row(f).begin(), m.row(f).end());
    }
    s.mean[f] = Mean(values);
    s.stddev[f] = PopulationStdDev(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min[f] = *lo;
    s.max[f] = *hi;
  }
  return s;
}

nlohmann::json FeatureStats::ToJson() const {
  return {{"mean", mean}, {"std", stddev}, {"min", min}, {"max", max}};
}

Matrix Perturb(const Matrix& x, const SegmentPartition& partition,
               const Coalition& coalition, Perturbation method,
               const FeatureStats& stats, RandomEngine& rng) {
  if (coalition.size() != partition.size()) {
    throw InvalidArgument("coalition length " +
                          std::to_string(coalition.size()) +
                          " does not match " +
                          std::to_string(partition.size()) + " segments");
  }
  if (partition.channels != x.rows() || partition.length != x.cols()) {
    throw ShapeError("partition does not cover the sample");
  }
  if (IsStochastic(method) && stats.mean.size() != x.rows()) {
    throw InvalidArgument("noise perturbation needs per-feature statistics");
  }
  Matrix out = x;
  for (std::size_t s = 0; s < partition.size(); ++s) {
    if (coalition[s] == 0) continue;
    const Segment& seg = partition.segments[s];
    auto row = out.row(seg.channel);
    switch (method) {
      case Perturbation::kZero:
        std::fill(row.begin() + seg.start, row.begin() + seg.end, 0.0);
        break;
      case Perturbation::kOne:
        std::fill(row.begin() + seg.start, row.begin() + seg.end, 1.0);
        break;
      case Perturbation::kMean: {
        // Shifted by the first value so a constant segment stays bit-exact.
        const auto src = x.row(seg.channel);
        const double pivot = src[seg.start];
        double shift = 0.0;
        for (std::size_t t = seg.start; t < seg.end; ++t) shift += src[t] - pivot;
        const double mean = pivot + shift / static_cast<double>(seg.size());
        std::fill(row.begin() + seg.start, row.begin() + seg.end, mean);
        break;
      }
      case Perturbation::kUniformNoise: {
        const double lo = stats.min[seg.channel];
        const double hi = stats.max[seg.channel];
        std::uniform_real_distribution<double> dist(lo, hi > lo ? hi : lo);
        for (std::size_t t = seg.start; t < seg.end; ++t) {
          row[t] = hi > lo ? dist(rng) : lo;
        }
        break;
      }
      case Perturbation::kNormalNoise: {
        std::normal_distribution<double> dist(stats.mean[seg.channel],
                                              stats.stddev[seg.channel]);
        for (std::size_t t = seg.start; t < seg.end; ++t) row[t] = dist(rng);
        break;
      }
    }
  }
  return out;
}

std::vector<Coalition> SampleCoalitions(std::size_t n_segments,
                                        std::size_t count, RandomEngine& rng) {
  if (count < 1) throw InvalidArgument("coalition count must be >= 1");
  std::vector<Coalition> out;
  out.reserve(count);
  out.emplace_back(n_segments, 0);
  std::bernoulli_distribution bit(0.5);
  for (std::size_t c = 1; c < count; ++c) {
    Coalition z(n_segments);
    for (auto& b : z) b = bit(rng) ? 1 : 0;
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace tsxai::segperturb
