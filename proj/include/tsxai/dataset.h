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

// Synthetic run-to-failure fleets, z-score normalisation, sliding windows,
// remaining-useful-life labels and the prognostics scoring functions.

#ifndef TSXAI_DATASET_H_
#define TSXAI_DATASET_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tsxai/matrix.h"

namespace tsxai::dataset {

struct FleetConfig {
  int n_units = 12;
  int channels = 8;
  // Channels [0, informative_channels) degrade; the rest are baseline plus
  // noise only. -1 means every channel degrades.
  int informative_channels = 4;
  int life_min = 120;
  int life_max = 240;
  int steps_per_cycle = 1;
  double drift = 2.0;           // trend amplitude at end of life
  double drift_exponent = 2.0;  // trend = drift * (cycle / TUL)^exponent
  double noise = 0.1;           // Gaussian noise standard deviation
  double baseline_spread = 0.5; // per-unit baseline offsets ~ U[-s, s]

  void Validate() const;
  nlohmann::json ToJson() const;
  static FleetConfig FromJson(const nlohmann::json& doc);
};

struct UnitHistory {
  int unit_id = 0;
  Matrix channels;  // F x T^k
  double total_useful_life = 0.0;
  std::vector<double> cycle;  // C^k_t per step, non-decreasing from 0

  std::size_t steps() const { return channels.cols(); }
};

// Deterministic in (config, seed).
std::vector<UnitHistory> GenerateFleet(const FleetConfig& config,
                                       std::uint64_t seed);

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population, guarded to 1 when zero
  std::vector<int> degenerate; // feature indices that hit the guard

  nlohmann::json ToJson() const;
  static NormalizationStats FromJson(const nlohmann::json& doc);
};

NormalizationStats ZScoreFit(const std::vector<UnitHistory>& histories);
NormalizationStats ZScoreFit(const std::vector<Matrix>& data);
Matrix ZScoreApply(const NormalizationStats& stats, const Matrix& data);
Matrix ZScoreInverse(const NormalizationStats& stats, const Matrix& data);
UnitHistory ZScoreApply(const NormalizationStats& stats,
                        const UnitHistory& history);

struct Sample {
  Matrix x;  // F x L_w
  double y = 0.0;
  int unit_id = 0;
  int t_end = 0;
};

// Windows ending at t_end = L_w .. T^k - 1 (T^k - L_w samples). The sample
// ending at t_end covers steps (t_end - L_w, t_end] and is labelled
// TUL^k - C^k_{t_end}.
std::vector<Sample> SlidingWindows(const UnitHistory& history, int window);

struct PredictionPair {
  double label = 0.0;
  double prediction = 0.0;
};

double Rmse(const std::vector<PredictionPair>& pairs);
// Mean of exp(alpha |y - y_hat|) - 1 with alpha = 1/13 when the prediction is
// below the label and 1/10 otherwise.
double NasaScore(const std::vector<PredictionPair>& pairs);
double CombinedScore(const std::vector<PredictionPair>& pairs);

// ---------------------------------------------------------------------------
// Files.

// Writes unit_<id>.csv (cycle, channel_0..channel_{F-1}) per unit and a
// fleet.json manifest into `dir`.
void WriteFleet(const std::string& dir, const std::vector<UnitHistory>& fleet,
                const FleetConfig& config, std::uint64_t seed);
std::vector<UnitHistory> ReadFleet(const std::string& dir);

// Little-endian binary sample cache:
//   bytes 0..7   magic "TSXSMP01"
//   uint32       F
//   uint32       T
//   uint64       count
//   count records of float64: label, unit_id, t_end, then F*T values
//   row-major.
void WriteSampleCache(const std::string& path,
                      const std::vector<Sample>& samples);
std::vector<Sample> ReadSampleCache(const std::string& path);

}  // namespace tsxai::dataset

#endif  // TSXAI_DATASET_H_
