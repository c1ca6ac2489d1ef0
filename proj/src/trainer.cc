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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "model_internal.h"
#include "tsxai/errors.h"
#include "tsxai/model.h"

namespace tsxai::tsmodel {
namespace {

struct ParameterBuffers {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  explicit ParameterBuffers(const std::vector<LayerSpec>& layers) {
    for (const LayerSpec& spec : layers) {
      weights.emplace_back(spec.weights.size(), 0.0);
      biases.emplace_back(spec.biases.size(), 0.0);
    }
  }

  void Zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
  }
};

// Accumulates d loss / d parameters for one example into `grads` and returns
// the squared error.
double AccumulateExample(const Model& model, const TrainingExample& example,
                         double scale, ParameterBuffers* grads) {
  const ForwardResult fwd = Forward(model, example.x);
  const double error = fwd.prediction - example.y;
  Matrix grad(1, 1, 2.0 * error * scale);
  for (std::size_t i = model.layer_count(); i-- > 0;) {
    const LayerSpec& spec = model.layer(i);
    const Matrix& input = i == 0 ? example.x : fwd.trace.post[i - 1];
    const Matrix dpre =
        internal::ActivationBackward(spec, fwd.trace.pre[i], grad);
    grad = internal::LayerBackward(spec, input, dpre, &grads->weights[i],
                                   &grads->biases[i]);
  }
  return error * error;
}

}  // namespace

TrainingResult Train(const Model& model,
                     const std::vector<TrainingExample>& examples,
                     const TrainingOptions& options) {
  TrainingResult result{model, {}};
  if (options.epochs == 0) return result;
  if (examples.empty()) throw InvalidArgument("training set is empty");
  if (options.batch_size == 0) throw InvalidArgument("batch size must be > 0");
  if (!(options.learning_rate > 0.0)) {
    throw InvalidArgument("learning rate must be > 0");
  }

  std::vector<LayerSpec> layers = model.layers();
  ParameterBuffers grads(layers);
  ParameterBuffers velocity(layers);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);

  Model current = model;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      grads.Zero();
      for (std::size_t b = start; b < end; ++b) {
        loss_sum += AccumulateExample(current, examples[order[b]], scale, &grads);
      }
      if (!std::isfinite(loss_sum)) {
        throw NumericalError("training diverged in epoch " +
                             std::to_string(epoch) + " (batch starting at " +
                             std::to_string(start) + "); lower the learning rate");
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t k = 0; k < layers[l].weights.size(); ++k) {
          double& v = velocity.weights[l][k];
          v = options.momentum * v - options.learning_rate * grads.weights[l][k];
          layers[l].weights[k] += v;
        }
        for (std::size_t k = 0; k < layers[l].biases.size(); ++k) {
          double& v = velocity.biases[l][k];
          v = options.momentum * v - options.learning_rate * grads.biases[l][k];
          layers[l].biases[k] += v;
        }
      }
      current = current.WithLayers(layers);
    }
    const double epoch_loss = loss_sum / static_cast<double>(examples.size());
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("training diverged in epoch " +
                           std::to_string(epoch));
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  result.model = std::move(current);
  return result;
}

double MeanSquaredError(const Model& model,
                        const std::vector<TrainingExample>& examples) {
  if (examples.empty()) throw InvalidArgument("empty example set");
  double acc = 0.0;
  for (const TrainingExample& ex : examples) {
    const double e = Predict(model, ex.x) - ex.y;
    acc += e * e;
  }
  return acc / static_cast<double>(examples.size());
}

}  // namespace tsxai::tsmodel
