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

// Minimal differentiable network engine for scalar time-series regression.
//
// Supported layers are stride-1 dilated 1D convolutions with "same" zero
// padding, a flatten reshape and fully connected layers. Every activation
// tensor is a Matrix with one row per channel; dense layers see their input
// flattened row-major and produce an (out x 1) column.
//
// All inference entry points (Forward, InputGradient, FeatureMapGradient,
// RelevancePropagate) are const and reentrant on a shared Model.

#ifndef TSXAI_MODEL_H_
#define TSXAI_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tsxai/matrix.h"

namespace tsxai::tsmodel {

enum class LayerKind { kConv1D, kDense, kFlatten };
enum class Activation { kLinear, kRelu, kLeakyRelu, kTanh };

inline constexpr double kLeakyReluSlope = 0.01;

std::string ToString(LayerKind kind);
std::string ToString(Activation activation);
LayerKind ParseLayerKind(const std::string& name);
Activation ParseActivation(const std::string& name);

double Activate(Activation activation, double pre);
// Derivative with respect to the pre-activation. The relu family uses 0 (or
// the leaky slope) at exactly zero.
double ActivationDerivative(Activation activation, double pre);

// One layer. For conv1d, weights are laid out [out][in][k]; for dense,
// [out][in]. An empty bias vector means the layer has no bias term.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int in = 0;
  int out = 0;
  int kernel = 1;
  int dilation = 1;
  Activation activation = Activation::kLinear;
  std::vector<double> weights;
  std::vector<double> biases;

  bool has_bias() const { return !biases.empty(); }
  std::size_t ParameterCount() const { return weights.size() + biases.size(); }

  double conv_weight(int o, int i, int j) const {
    return weights[(static_cast<std::size_t>(o) * in + i) * kernel + j];
  }
  double dense_weight(int o, int i) const {
    return weights[static_cast<std::size_t>(o) * in + i];
  }

  static LayerSpec Conv1D(int in, int out, int kernel, int dilation,
                          Activation activation, bool bias = true);
  static LayerSpec Dense(int in, int out, Activation activation,
                         bool bias = true);
  static LayerSpec Flatten();
};

struct Shape {
  std::size_t channels = 0;
  std::size_t length = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Left zero padding of a "same" convolution; the right pad is the remainder.
int SamePaddingLeft(int kernel, int dilation);

// Immutable after construction. The constructor validates every layer and the
// shape chain and throws ShapeError / InvalidArgument naming the layer index.
class Model {
 public:
  Model(Shape input_shape, std::vector<LayerSpec> layers,
        nlohmann::json metadata = nlohmann::json::object());

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t layer_count() const { return layers_.size(); }
  // Output shape of layer i (i < layer_count()).
  const Shape& output_shape(std::size_t i) const { return shapes_.at(i); }
  const nlohmann::json& metadata() const { return metadata_; }

  // Indices of conv1d layers in model order.
  std::vector<std::size_t> ConvLayerIndices() const;

  // Throws InvalidArgument unless the final activation is relu (non-negative
  // remaining-useful-life output).
  void RequireRegressionHead() const;

  // Returns a copy with different parameters but the same architecture; the
  // parameter vectors are validated like the constructor does.
  Model WithLayers(std::vector<LayerSpec> layers) const;
  Model WithMetadata(nlohmann::json metadata) const;

 private:
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  nlohmann::json metadata_;
};

// Pre-activations and activations of every layer. post[i] is the output of
// layer i (its input is post[i - 1] or the model input for i = 0).
struct ForwardTrace {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
  double prediction = 0.0;
};

struct ForwardResult {
  double prediction = 0.0;
  ForwardTrace trace;
};

// Throws ShapeError on shape mismatch and InvalidArgument on non-finite input.
ForwardResult Forward(const Model& model, const Matrix& x);
double Predict(const Model& model, const Matrix& x);

// Runs layers [first_layer, end) starting from `input`, which must have the
// shape layer first_layer expects. Used to replay a trace from a stored
// intermediate activation.
double ForwardFrom(const Model& model, std::size_t first_layer,
                   const Matrix& input);

// d prediction / d input, same shape as x.
Matrix InputGradient(const Model& model, const Matrix& x);

struct FeatureMapGradient {
  Matrix activation;  // A: post-activation output of the addressed layer.
  Matrix gradient;    // G: d prediction / d A.
  ForwardTrace trace;
};

// layer_index must address a conv1d layer (InvalidArgument otherwise).
FeatureMapGradient ComputeFeatureMapGradient(const Model& model,
                                             const Matrix& x,
                                             std::size_t layer_index);

// Back-propagates a gradient with respect to the output of `from_layer` down
// to the model input, using the recorded trace.
Matrix BackpropagateToInput(const Model& model, const Matrix& x,
                            const ForwardTrace& trace, std::size_t from_layer,
                            Matrix output_gradient);

// Epsilon-rule relevance propagation. Output relevance starts at the
// prediction. Biases enter the denominators only. The stabiliser adds
// +epsilon to non-negative denominators and -epsilon otherwise. With
// epsilon == 0 an exactly-zero denominator carrying non-zero relevance raises
// NumericalError.
Matrix RelevancePropagate(const Model& model, const Matrix& x,
                          double epsilon = 1e-9);

// Relevance at the input of every layer, innermost last: result[i] is the
// relevance on the input of layer i; result[layer_count()] is the output
// relevance. Exposed for the conservation tests.
std::vector<Matrix> RelevanceByLayer(const Model& model, const Matrix& x,
                                     double epsilon = 1e-9);

std::size_t ParameterCount(const Model& model);

// Glorot-uniform weights and zero biases, deterministic in seed.
Model InitializeParameters(const Model& model, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training.

struct TrainingExample {
  Matrix x;
  double y = 0.0;
};

struct TrainingOptions {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainingResult {
  Model model;
  std::vector<double> epoch_loss;  // mean squared error per epoch
};

// Mini-batch SGD with momentum on the mean squared error. Single threaded
// and deterministic in options.seed. Throws NumericalError if the loss
// becomes non-finite.
TrainingResult Train(const Model& model,
                     const std::vector<TrainingExample>& examples,
                     const TrainingOptions& options);

double MeanSquaredError(const Model& model,
                        const std::vector<TrainingExample>& examples);

// ---------------------------------------------------------------------------
// Serialization.

nlohmann::json ModelToJson(const Model& model);
Model ModelFromJson(const nlohmann::json& doc);

// Numbers are written with 17 significant digits.
std::string SerializeModel(const Model& model);
Model ParseModel(const std::string& text);

void SaveModel(const Model& model, const std::string& path);
// Loads and validates; additionally requires a relu output layer.
Model LoadModel(const std::string& path);

// ---------------------------------------------------------------------------
// Architectures.

struct ConvNetArchitecture {
  std::size_t channels = 8;
  std::size_t window = 64;
  std::vector<int> conv_filters = {16, 16, 16, 16};
  int kernel = 3;
  int dilation = 2;
  Activation conv_activation = Activation::kTanh;
  std::vector<int> dense_units = {32, 16};
  Activation dense_activation = Activation::kLeakyRelu;
  bool bias = true;
};

// Stacked conv1d layers, flatten, dense layers and a single relu output.
Model BuildConvNet(const ConvNetArchitecture& arch);

}  // namespace tsxai::tsmodel

#endif  // TSXAI_MODEL_H_
