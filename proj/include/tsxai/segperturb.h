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

// Per-channel segmentation of multivariate series, segment perturbation and
// coalition sampling for the surrogate explainers.

#ifndef TSXAI_SEGPERTURB_H_
#define TSXAI_SEGPERTURB_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsxai/matrix.h"
#include "tsxai/random.h"

namespace tsxai::segperturb {

struct Segment {
  std::size_t channel = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::size_t size() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class SegmentationKind { kUniform, kL2Optimal };

std::string ToString(SegmentationKind kind);
SegmentationKind ParseSegmentationKind(const std::string& name);

// Segments of all channels, channel-major, each channel covering [0, T)
// with contiguous non-empty segments.
struct SegmentPartition {
  SegmentationKind kind = SegmentationKind::kUniform;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<Segment> segments;

  std::size_t size() const { return segments.size(); }
  // Throws InvalidArgument when coverage/contiguity does not hold.
  void Validate() const;
  nlohmann::json ToJson() const;
};

// Segment start offsets (and T as the final entry) of one channel split into
// windows of size m; the last window takes the remainder.
std::vector<std::size_t> UniformBoundaries(std::size_t length, std::size_t m);

// Sum of squared deviations from the mean over ts[i, j).
double SegmentCost(std::span<const double> ts, std::size_t i, std::size_t j);

struct L2Segmentation {
  std::vector<std::size_t> boundaries;  // 0 = b_0 < b_1 < ... < b_n = T
  double cost = 0.0;                    // sum of SegmentCost, left to right
};

// Exact dynamic programme over prefix sums. Among optimal solutions the
// lexicographically smallest boundary vector is returned.
L2Segmentation L2OptimalSegmentation(std::span<const double> ts,
                                     std::size_t n_segments);

// Total cost of an arbitrary boundary vector, summed left to right.
double SegmentationCost(std::span<const double> ts,
                        const std::vector<std::size_t>& boundaries);

SegmentPartition UniformPartition(std::size_t channels, std::size_t length,
                                  std::size_t window);
// Each channel of x is segmented independently into n_segments pieces.
SegmentPartition L2OptimalPartition(const Matrix& x, std::size_t n_segments);
// Convenience: segments_per_channel pieces per channel of the given kind; for
// the uniform kind the window is ceil(T / segments_per_channel).
SegmentPartition MakePartition(SegmentationKind kind, const Matrix& x,
                               std::size_t segments_per_channel);

// 1 = segment is perturbed, 0 = left untouched.
using Coalition = std::vector<std::uint8_t>;

enum class Perturbation { kZero, kOne, kMean, kUniformNoise, kNormalNoise };

std::string ToString(Perturbation p);
Perturbation ParsePerturbation(const std::string& name);
bool IsStochastic(Perturbation p);

// Per-feature statistics of the evaluation set used by the noise operators.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> min;
  std::vector<double> max;

  static FeatureStats FromSamples(const std::vector<Matrix>& samples);
  nlohmann::json ToJson() const;
};

// Replaces every segment whose coalition bit is 1. Noise values are drawn
// from `rng` in segment order, element by element.
Matrix Perturb(const Matrix& x, const SegmentPartition& partition,
               const Coalition& coalition, Perturbation method,
               const FeatureStats& stats, RandomEngine& rng);

// First element is always the all-zeros coalition, followed by count - 1
// uniform draws over {0,1}^n.
std::vector<Coalition> SampleCoalitions(std::size_t n_segments,
                                        std::size_t count, RandomEngine& rng);

}  // namespace tsxai::segperturb

#endif  // TSXAI_SEGPERTURB_H_
