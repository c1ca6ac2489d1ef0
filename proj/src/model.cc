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

#include "tsxai/model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "model_internal.h"
#include "tsxai/errors.h"

namespace tsxai::tsmodel {

std::string ToString(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv1D:
      return "conv1d";
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kFlatten:
      return "flatten";
  }
  return "unknown";
}

std::string ToString(Activation activation) {
  switch (activation) {
    case Activation::kLinear:
      return "linear";
    case Activation::kRelu:
      return "relu";
    case Activation::kLeakyRelu:
      return "leaky_relu";
    case Activation::kTanh:
      return "tanh";
  }
  return "unknown";
}

LayerKind ParseLayerKind(const std::string& name) {
  if (name == "conv1d") return LayerKind::kConv1D;
  if (name == "dense") return LayerKind::kDense;
  if (name == "flatten") return LayerKind::kFlatten;
  throw InvalidArgument("unknown layer kind '" + name + "'");
}

Activation ParseActivation(const std::string& name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kRelu;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "tanh") return Activation::kTanh;
  throw InvalidArgument("unknown activation '" + name + "'");
}

double Activate(Activation activation, double pre) {
  switch (activation) {
    case Activation::kLinear:
      return pre;
    case Activation::kRelu:
      return pre > 0.0 ? pre : 0.0;
    case Activation::kLeakyRelu:
      return pre > 0.0 ? pre : kLeakyReluSlope * pre;
    case Activation::kTanh:
      return std::tanh(pre);
  }
  return pre;
}

double ActivationDerivative(Activation activation, double pre) {
  switch (activation) {
    case Activation::kLinear:
      return 1.0;
    case Activation::kRelu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu:
      return pre > 0.0 ? 1.0 : kLeakyReluSlope;
    case Activation::kTanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

LayerSpec LayerSpec::Conv1D(int in, int out, int kernel, int dilation,
                            Activation activation, bool bias) {
  LayerSpec spec;
  spec.kind = LayerKind::kConv1D;
  spec.in = in;
  spec.out = out;
  spec.kernel = kernel;
  spec.dilation = dilation;
  spec.activation = activation;
  spec.weights.assign(static_cast<std::size_t>(in) * out * kernel, 0.0);
  if (bias) spec.biases.assign(out, 0.0);
  return spec;
}

LayerSpec LayerSpec::Dense(int in, int out, Activation activation, bool bias) {
  LayerSpec spec;
  spec.kind = LayerKind::kDense;
  spec.in = in;
  spec.out = out;
  spec.activation = activation;
  spec.weights.assign(static_cast<std::size_t>(in) * out, 0.0);
  if (bias) spec.biases.assign(out, 0.0);
  return spec;
}

LayerSpec LayerSpec::Flatten() {
  LayerSpec spec;
  spec.kind = LayerKind::kFlatten;
  return spec;
}

int SamePaddingLeft(int kernel, int dilation) {
  return ((kernel - 1) * dilation) / 2;
}

namespace {

std::string LayerTag(std::size_t index) {
  return "layer " + std::to_string(index);
}

Shape ValidateLayer(const LayerSpec& spec, const Shape& incoming,
                    std::size_t index) {
  switch (spec.kind) {
    case LayerKind::kFlatten:
      return {incoming.channels * incoming.length, 1};
    case LayerKind::kConv1D: {
      if (spec.in < 1 || spec.out < 1 || spec.kernel < 1) {
        throw InvalidArgument(LayerTag(index) +
                              ": conv1d needs in, out, k >= 1");
      }
      if (spec.dilation < 1) {
        throw InvalidArgument(LayerTag(index) + ": dilation must be >= 1");
      }
      const std::size_t expected =
          static_cast<std::size_t>(spec.in) * spec.out * spec.kernel;
      if (spec.weights.size() != expected) {
        throw ShapeError(LayerTag(index) + ": conv1d expects " +
                         std::to_string(expected) + " weights, got " +
                         std::to_string(spec.weights.size()));
      }
      if (spec.has_bias() &&
          spec.biases.size() != static_cast<std::size_t>(spec.out)) {
        throw ShapeError(LayerTag(index) + ": conv1d expects " +
                         std::to_string(spec.out) + " biases, got " +
                         std::to_string(spec.biases.size()));
      }
      if (incoming.channels != static_cast<std::size_t>(spec.in)) {
        throw ShapeError(LayerTag(index) + ": conv1d expects " +
                         std::to_string(spec.in) + " input channels, got " +
                         std::to_string(incoming.channels));
      }
      return {static_cast<std::size_t>(spec.out), incoming.length};
    }
    case LayerKind::kDense: {
      if (spec.in < 1 || spec.out < 1) {
        throw InvalidArgument(LayerTag(index) + ": dense needs in, out >= 1");
      }
      const std::size_t expected =
          static_cast<std::size_t>(spec.in) * spec.out;
      if (spec.weights.size() != expected) {
        throw ShapeError(LayerTag(index) + ": dense expects " +
                         std::to_string(expected) + " weights, got " +
                         std::to_string(spec.weights.size()));
      }
      if (spec.has_bias() &&
          spec.biases.size() != static_cast<std::size_t>(spec.out)) {
        throw ShapeError(LayerTag(index) + ": dense expects " +
                         std::to_string(spec.out) + " biases, got " +
                         std::to_string(spec.biases.size()));
      }
      if (incoming.channels * incoming.length !=
          static_cast<std::size_t>(spec.in)) {
        throw ShapeError(LayerTag(index) + ": dense expects " +
                         std::to_string(spec.in) + " inputs, got " +
                         std::to_string(incoming.channels * incoming.length));
      }
      return {static_cast<std::size_t>(spec.out), 1};
    }
  }
  throw InvalidArgument(LayerTag(index) + ": unknown layer kind");
}

}  // namespace

Model::Model(Shape input_shape, std::vector<LayerSpec> layers,
             nlohmann::json metadata)
    : input_shape_(input_shape),
      layers_(std::move(layers)),
      metadata_(std::move(metadata)) {
  if (input_shape_.channels == 0 || input_shape_.length == 0) {
    throw ShapeError("input shape must be non-empty");
  }
  Shape current = input_shape_;
  shapes_.reserve(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    current = ValidateLayer(layers_[i], current, i);
    shapes_.push_back(current);
  }
  if (current.channels * current.length != 1) {
    throw ShapeError("model output must be a scalar, got " +
                     std::to_string(current.channels) + "x" +
                     std::to_string(current.length));
  }
}

std::vector<std::size_t> Model::ConvLayerIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].kind == LayerKind::kConv1D) out.push_back(i);
  }
  return out;
}

void Model::RequireRegressionHead() const {
  if (layers_.empty() || layers_.back().kind == LayerKind::kFlatten ||
      layers_.back().activation != Activation::kRelu) {
    throw InvalidArgument("final layer must use a relu activation");
  }
}

Model Model::WithLayers(std::vector<LayerSpec> layers) const {
  return Model(input_shape_, std::move(layers), metadata_);
}

Model Model::WithMetadata(nlohmann::json metadata) const {
  return Model(input_shape_, layers_, std::move(metadata));
}

// ---------------------------------------------------------------------------
// Layer primitives.

namespace internal {

Matrix LayerPreActivation(const LayerSpec& spec, const Matrix& input,
                          const Shape& out_shape) {
  switch (spec.kind) {
    case LayerKind::kFlatten:
      return Matrix(out_shape.channels, 1, input.storage());
    case LayerKind::kConv1D: {
      const int length = static_cast<int>(input.cols());
      const int pad = SamePaddingLeft(spec.kernel, spec.dilation);
      Matrix pre(spec.out, length);
      for (int o = 0; o < spec.out; ++o) {
        auto out_row = pre.row(o);
        if (spec.has_bias()) {
          for (int t = 0; t < length; ++t) out_row[t] = spec.biases[o];
        }
        for (int c = 0; c < spec.in; ++c) {
          const auto in_row = input.row(c);
          for (int j = 0; j < spec.kernel; ++j) {
            const double w = spec.conv_weight(o, c, j);
            const int shift = j * spec.dilation - pad;
            const int t_begin = std::max(0, -shift);
            const int t_end = std::min(length, length - shift);
            for (int t = t_begin; t < t_end; ++t) {
              out_row[t] += w * in_row[t + shift];
            }
          }
        }
      }
      return pre;
    }
    case LayerKind::kDense: {
      const auto flat = input.values();
      Matrix pre(spec.out, 1);
      for (int o = 0; o < spec.out; ++o) {
        double acc = spec.has_bias() ? spec.biases[o] : 0.0;
        const double* w = spec.weights.data() + static_cast<std::size_t>(o) *
                                                    spec.in;
        for (int i = 0; i < spec.in; ++i) acc += w[i] * flat[i];
        pre[o] = acc;
      }
      return pre;
    }
  }
  throw InvalidArgument("unknown layer kind");
}

Matrix Activate(const LayerSpec& spec, const Matrix& pre) {
  if (spec.kind == LayerKind::kFlatten ||
      spec.activation == Activation::kLinear) {
    return pre;
  }
  Matrix post(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    post[i] = tsmodel::Activate(spec.activation, pre[i]);
  }
  return post;
}

Matrix ActivationBackward(const LayerSpec& spec, const Matrix& pre,
                          const Matrix& output_gradient) {
  if (spec.kind == LayerKind::kFlatten ||
      spec.activation == Activation::kLinear) {
    return output_gradient;
  }
  Matrix dpre(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    dpre[i] = output_gradient[i] *
              tsmodel::ActivationDerivative(spec.activation, pre[i]);
  }
  return dpre;
}

Matrix LayerBackward(const LayerSpec& spec, const Matrix& input,
                     const Matrix& dpre, std::vector<double>* dweights,
                     std::vector<double>* dbiases) {
  Matrix dinput(input.rows(), input.cols());
  switch (spec.kind) {
    case LayerKind::kFlatten:
      return Matrix(input.rows(), input.cols(), dpre.storage());
    case LayerKind::kConv1D: {
      const int length = static_cast<int>(input.cols());
      const int pad = SamePaddingLeft(spec.kernel, spec.dilation);
      for (int o = 0; o < spec.out; ++o) {
        const auto g_row = dpre.row(o);
        if (dbiases != nullptr && spec.has_bias()) {
          double acc = 0.0;
          for (int t = 0; t < length; ++t) acc += g_row[t];
          (*dbiases)[o] += acc;
        }
        for (int c = 0; c < spec.in; ++c) {
          const auto in_row = input.row(c);
          auto din_row = dinput.row(c);
          for (int j = 0; j < spec.kernel; ++j) {
            const std::size_t widx =
                (static_cast<std::size_t>(o) * spec.in + c) * spec.kernel + j;
            const double w = spec.weights[widx];
            const int shift = j * spec.dilation - pad;
            const int t_begin = std::max(0, -shift);
            const int t_end = std::min(length, length - shift);
            double dw = 0.0;
            for (int t = t_begin; t < t_end; ++t) {
              din_row[t + shift] += w * g_row[t];
              dw += g_row[t] * in_row[t + shift];
            }
            if (dweights != nullptr) (*dweights)[widx] += dw;
          }
        }
      }
      return dinput;
    }
    case LayerKind::kDense: {
      const auto flat = input.values();
      auto din = dinput.values();
      for (int o = 0; o < spec.out; ++o) {
        const double g = dpre[o];
        const std::size_t base = static_cast<std::size_t>(o) * spec.in;
        if (dbiases != nullptr && spec.has_bias()) (*dbiases)[o] += g;
        if (g == 0.0) continue;
        for (int i = 0; i < spec.in; ++i) {
          din[i] += spec.weights[base + i] * g;
          if (dweights != nullptr) (*dweights)[base + i] += g * flat[i];
        }
      }
      return dinput;
    }
  }
  throw InvalidArgument("unknown layer kind");
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Inference.

namespace {

void CheckInput(const Model& model, const Matrix& x) {
  const Shape& s = model.input_shape();
  if (x.rows() != s.channels || x.cols() != s.length) {
    throw ShapeError("input is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", model expects " +
                     std::to_string(s.channels) + "x" +
                     std::to_string(s.length));
  }
  if (!AllFinite(x.values())) {
    throw InvalidArgument("input contains non-finite values");
  }
}

const Matrix& LayerInput(const Matrix& x, const ForwardTrace& trace,
                         std::size_t layer) {
  return layer == 0 ? x : trace.post[layer - 1];
}

}  // namespace

ForwardResult Forward(const Model& model, const Matrix& x) {
  CheckInput(model, x);
  ForwardResult result;
  ForwardTrace& trace = result.trace;
  trace.pre.reserve(model.layer_count());
  trace.post.reserve(model.layer_count());
  const Matrix* current = &x;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const LayerSpec& spec = model.layer(i);
    trace.pre.push_back(
        internal::LayerPreActivation(spec, *current, model.output_shape(i)));
    trace.post.push_back(internal::Activate(spec, trace.pre.back()));
    current = &trace.post.back();
  }
  trace.prediction = (*current)[0];
  result.prediction = trace.prediction;
  return result;
}

double Predict(const Model& model, const Matrix& x) {
  return Forward(model, x).prediction;
}

double ForwardFrom(const Model& model, std::size_t first_layer,
                   const Matrix& input) {
  if (first_layer > model.layer_count()) {
    throw InvalidArgument("layer index out of range");
  }
  const Shape expected = first_layer == 0
                             ? model.input_shape()
                             : model.output_shape(first_layer - 1);
  if (input.rows() != expected.channels || input.cols() != expected.length) {
    throw ShapeError("replay input has the wrong shape");
  }
  Matrix current = input;
  for (std::size_t i = first_layer; i < model.layer_count(); ++i) {
    const LayerSpec& spec = model.layer(i);
    current = internal::Activate(
        spec,
        internal::LayerPreActivation(spec, current, model.output_shape(i)));
  }
  return current[0];
}

Matrix BackpropagateToInput(const Model& model, const Matrix& x,
                            const ForwardTrace& trace, std::size_t from_layer,
                            Matrix output_gradient) {
  if (from_layer >= model.layer_count()) {
    throw InvalidArgument("layer index out of range");
  }
  Matrix grad = std::move(output_gradient);
  for (std::size_t i = from_layer + 1; i-- > 0;) {
    const LayerSpec& spec = model.layer(i);
    const Matrix dpre = internal::ActivationBackward(spec, trace.pre[i], grad);
    grad = internal::LayerBackward(spec, LayerInput(x, trace, i), dpre,
                                   nullptr, nullptr);
  }
  return grad;
}

namespace {

// d prediction / d post[layer].
Matrix GradientAtLayerOutput(const Model& model, const Matrix& x,
                             const ForwardTrace& trace, std::size_t layer) {
  const std::size_t last = model.layer_count() - 1;
  Matrix grad(1, 1, 1.0);
  for (std::size_t i = last; i > layer; --i) {
    const LayerSpec& spec = model.layer(i);
    const Matrix dpre = internal::ActivationBackward(spec, trace.pre[i], grad);
    grad = internal::LayerBackward(spec, LayerInput(x, trace, i), dpre,
                                   nullptr, nullptr);
  }
  return grad;
}

}  // namespace

Matrix InputGradient(const Model& model, const Matrix& x) {
  ForwardResult fwd = Forward(model, x);
  if (model.layer_count() == 0) return Matrix(x.rows(), x.cols(), 1.0);
  const std::size_t last = model.layer_count() - 1;
  return BackpropagateToInput(model, x, fwd.trace, last, Matrix(1, 1, 1.0));
}

FeatureMapGradient ComputeFeatureMapGradient(const Model& model,
                                             const Matrix& x,
                                             std::size_t layer_index) {
  if (layer_index >= model.layer_count()) {
    throw InvalidArgument("layer index " + std::to_string(layer_index) +
                          " out of range");
  }
  if (model.layer(layer_index).kind != LayerKind::kConv1D) {
    throw InvalidArgument("layer " + std::to_string(layer_index) +
                          " is not a conv1d layer");
  }
  FeatureMapGradient out;
  out.trace = Forward(model, x).trace;
  out.activation = out.trace.post[layer_index];
  out.gradient = GradientAtLayerOutput(model, x, out.trace, layer_index);
  return out;
}

// ---------------------------------------------------------------------------
// Relevance propagation.

namespace {

Matrix LayerRelevance(const LayerSpec& spec, const Matrix& input,
                      const Matrix& pre, const Matrix& relevance,
                      double epsilon) {
  if (spec.kind == LayerKind::kFlatten) {
    return Matrix(input.rows(), input.cols(), relevance.storage());
  }
  // s_k = R_k / (z_k + stabiliser); R_j = a_j * sum_k w_jk s_k.
  Matrix scaled(pre.rows(), pre.cols());
  for (std::size_t k = 0; k < pre.size(); ++k) {
    double denom = pre[k];
    if (epsilon > 0.0) denom += denom >= 0.0 ? epsilon : -epsilon;
    if (denom == 0.0) {
      if (relevance[k] != 0.0) {
        throw NumericalError(
            "relevance propagation hit a zero denominator with epsilon = 0");
      }
      scaled[k] = 0.0;
      continue;
    }
    scaled[k] = relevance[k] / denom;
  }
  Matrix back =
      internal::LayerBackward(spec, input, scaled, nullptr, nullptr);
  for (std::size_t j = 0; j < back.size(); ++j) back[j] *= input[j];
  return back;
}

}  // namespace

std::vector<Matrix> RelevanceByLayer(const Model& model, const Matrix& x,
                                     double epsilon) {
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  ForwardResult fwd = Forward(model, x);
  const std::size_t n = model.layer_count();
  std::vector<Matrix> relevance(n + 1);
  relevance[n] = Matrix(1, 1, fwd.prediction);
  for (std::size_t i = n; i-- > 0;) {
    // Relevance passes through the activation unchanged.
    relevance[i] = LayerRelevance(model.layer(i), LayerInput(x, fwd.trace, i),
                                  fwd.trace.pre[i], relevance[i + 1], epsilon);
  }
  return relevance;
}

Matrix RelevancePropagate(const Model& model, const Matrix& x,
                          double epsilon) {
  return RelevanceByLayer(model, x, epsilon).front();
}

// ---------------------------------------------------------------------------

std::size_t ParameterCount(const Model& model) {
  std::size_t total = 0;
  for (const LayerSpec& spec : model.layers()) total += spec.ParameterCount();
  return total;
}

Model InitializeParameters(const Model& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LayerSpec> layers = model.layers();
  for (LayerSpec& spec : layers) {
    if (spec.kind == LayerKind::kFlatten) continue;
    const double fan_in = static_cast<double>(spec.in) * spec.kernel;
    const double fan_out = static_cast<double>(spec.out) * spec.kernel;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : spec.weights) w = dist(rng);
    for (double& b : spec.biases) b = 0.0;
  }
  return model.WithLayers(std::move(layers));
}

Model BuildConvNet(const ConvNetArchitecture& arch) {
  std::vector<LayerSpec> layers;
  int channels = static_cast<int>(arch.channels);
  for (int filters : arch.conv_filters) {
    layers.push_back(LayerSpec::Conv1D(channels, filters, arch.kernel,
                                       arch.dilation, arch.conv_activation,
                                       arch.bias));
    channels = filters;
  }
  layers.push_back(LayerSpec::Flatten());
  int width = channels * static_cast<int>(arch.window);
  for (int units : arch.dense_units) {
    layers.push_back(
        LayerSpec::Dense(width, units, arch.dense_activation, arch.bias));
    width = units;
  }
  layers.push_back(LayerSpec::Dense(width, 1, Activation::kRelu, arch.bias));
  return Model({arch.channels, arch.window}, std::move(layers));
}

}  // namespace tsxai::tsmodel
