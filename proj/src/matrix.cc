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

#include "tsxai/matrix.h"

#include <cmath>
#include <string>
#include <utility>

#include "tsxai/errors.h"

namespace tsxai {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix " + std::to_string(rows_) + "x" +
                     std::to_string(cols_) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

double EuclideanDistance(const Matrix& a, const Matrix& b) {
  if (!a.SameShape(b)) {
    throw ShapeError("distance between matrices of different shapes");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double Sum(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return Sum(values) / static_cast<double>(values.size());
}

double PopulationStdDev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  // Mean taken relative to the first value: equal inputs give exactly 0.
  const double pivot = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - pivot;
  const double mean = pivot + shift / static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

bool AllFinite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace tsxai
