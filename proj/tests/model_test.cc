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

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "tsxai/errors.h"

namespace tsxai::tsmodel {
namespace {

using ::tsxai::testing::LinearModel;
using ::tsxai::testing::MaxRelativeError;
using ::tsxai::testing::NumericGradient;
using ::tsxai::testing::RandomMatrix;
using ::tsxai::testing::Randomize;

// Direct evaluation of a stride-1 dilated convolution with "same" padding.
Matrix NaiveConv(const LayerSpec& spec, const Matrix& x) {
  const int length = static_cast<int>(x.cols());
  const int pad_left = ((spec.kernel - 1) * spec.dilation) / 2;
  Matrix out(spec.out, length);
  for (int o = 0; o < spec.out; ++o) {
    for (int t = 0; t < length; ++t) {
      double acc = spec.has_bias() ? spec.biases[o] : 0.0;
      for (int c = 0; c < spec.in; ++c) {
        for (int j = 0; j < spec.kernel; ++j) {
          const int src = t + j * spec.dilation - pad_left;
          if (src < 0 || src >= length) continue;
          acc += spec.weights[(o * spec.in + c) * spec.kernel + j] * x(c, src);
        }
      }
      out(o, t) = acc;
    }
  }
  return out;
}

Model SmallConvNet(Activation conv, Activation dense, bool bias = true) {
  std::vector<LayerSpec> layers = {
      LayerSpec::Conv1D(2, 3, 3, 2, conv, bias),
      LayerSpec::Conv1D(3, 2, 2, 1, conv, bias),
      LayerSpec::Flatten(),
      LayerSpec::Dense(2 * 7, 4, dense, bias),
      LayerSpec::Dense(4, 1, Activation::kRelu, bias),
  };
  return Model({2, 7}, std::move(layers));
}

TEST(ActivationTest, ValuesAndDerivatives) {
  EXPECT_EQ(Activate(Activation::kRelu, -2.0), 0.0);
  EXPECT_EQ(Activate(Activation::kRelu, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(Activate(Activation::kLeakyRelu, -2.0), -0.02);
  EXPECT_DOUBLE_EQ(Activate(Activation::kTanh, 0.5), std::tanh(0.5));
  EXPECT_EQ(ActivationDerivative(Activation::kRelu, 0.0), 0.0);
  EXPECT_EQ(ActivationDerivative(Activation::kLeakyRelu, 0.0), kLeakyReluSlope);
  EXPECT_DOUBLE_EQ(ActivationDerivative(Activation::kTanh, 0.3),
                   1.0 - std::tanh(0.3) * std::tanh(0.3));
  EXPECT_EQ(ParseActivation(ToString(Activation::kLeakyRelu)),
            Activation::kLeakyRelu);
  EXPECT_THROW(ParseActivation("softmax"), InvalidArgument);
}

TEST(ModelTest, SamePaddingMatchesNaiveConvolution) {
  RandomEngine rng(3);
  for (int kernel : {1, 2, 3, 4, 5}) {
    for (int dilation : {1, 2, 3}) {
      LayerSpec conv =
          LayerSpec::Conv1D(2, 3, kernel, dilation, Activation::kLinear);
      Model probe({2, 9}, {conv, LayerSpec::Flatten(),
                           LayerSpec::Dense(27, 1, Activation::kLinear)});
      probe = Randomize(probe, 10 + kernel * 7 + dilation);
      const Matrix x = RandomMatrix(2, 9, rng);
      const ForwardResult fwd = Forward(probe, x);
      const Matrix expected = NaiveConv(probe.layer(0), x);
      ASSERT_EQ(fwd.trace.pre[0].rows(), 3u);
      ASSERT_EQ(fwd.trace.pre[0].cols(), 9u);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(fwd.trace.pre[0][i], expected[i], 1e-12)
            << "kernel " << kernel << " dilation " << dilation;
      }
    }
  }
}

TEST(ModelTest, LinearModelPredictsDotProduct) {
  Matrix w(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  Matrix x(2, 3, std::vector<double>{1, 0, -1, 0.5, 0.5, 2});
  EXPECT_DOUBLE_EQ(Predict(LinearModel(w), x), 1 - 3 + 2 + 2.5 + 12);
}

TEST(ModelTest, ValidationRejectsBrokenShapes) {
  EXPECT_THROW(Model({2, 5}, {LayerSpec::Conv1D(3, 2, 3, 1, Activation::kRelu)}),
               ShapeError);
  EXPECT_THROW(Model({2, 5}, {LayerSpec::Dense(10, 2, Activation::kRelu)}),
               ShapeError);
  LayerSpec bad = LayerSpec::Dense(10, 1, Activation::kRelu);
  bad.weights.pop_back();
  EXPECT_THROW(Model({2, 5}, {bad}), Error);
  EXPECT_THROW(Model({0, 5}, {}), ShapeError);
  // A lone 1x1 input is its own prediction.
  Model identity({1, 1}, {});
  EXPECT_EQ(Predict(identity, Matrix(1, 1, 4.5)), 4.5);
}

TEST(ModelTest, ForwardRejectsMismatchedOrNonFiniteInput) {
  const Model m = Randomize(SmallConvNet(Activation::kTanh, Activation::kRelu), 1);
  EXPECT_THROW(Forward(m, Matrix(3, 7)), ShapeError);
  Matrix x(2, 7);
  x(1, 3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Forward(m, x), InvalidArgument);
}

TEST(ModelTest, RegressionHeadRequiresRelu) {
  EXPECT_NO_THROW(SmallConvNet(Activation::kTanh, Activation::kRelu)
                      .RequireRegressionHead());
  EXPECT_THROW(LinearModel(Matrix(1, 2, 1.0)).RequireRegressionHead(),
               InvalidArgument);
}

TEST(ModelTest, InputGradientMatchesFiniteDifferences) {
  RandomEngine rng(11);
  for (Activation act : {Activation::kLinear, Activation::kTanh,
                         Activation::kLeakyRelu, Activation::kRelu}) {
    const Model m = Randomize(SmallConvNet(act, act), 100 + static_cast<int>(act));
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix x = RandomMatrix(2, 7, rng);
      const Matrix analytic = InputGradient(m, x);
      const Matrix numeric = NumericGradient(m, x);
      EXPECT_LT(MaxRelativeError(analytic, numeric, 1e-4), 1e-5)
          << ToString(act) << " trial " << trial;
    }
  }
}

TEST(ModelTest, LinearModelGradientIsWeights) {
  RandomEngine rng(5);
  const Matrix w = RandomMatrix(3, 4, rng);
  const Matrix g = InputGradient(LinearModel(w), RandomMatrix(3, 4, rng));
  EXPECT_EQ(g, w);
}

TEST(ModelTest, FeatureMapGradientReplaysToPrediction) {
  RandomEngine rng(8);
  const Model m = Randomize(SmallConvNet(Activation::kTanh, Activation::kTanh), 9);
  const Matrix x = RandomMatrix(2, 7, rng);
  const FeatureMapGradient fm = ComputeFeatureMapGradient(m, x, 0);
  // Perturb one activation and compare against the stored gradient.
  const double h = 1e-5;
  Matrix up = fm.activation, down = fm.activation;
  up(1, 2) += h;
  down(1, 2) -= h;
  const double numeric = (ForwardFrom(m, 1, up) - ForwardFrom(m, 1, down)) / (2 * h);
  EXPECT_NEAR(fm.gradient(1, 2), numeric, 1e-7);
  EXPECT_DOUBLE_EQ(ForwardFrom(m, 1, fm.activation), Predict(m, x));
  EXPECT_THROW(ComputeFeatureMapGradient(m, x, 2), InvalidArgument);
}

TEST(RelevanceTest, ConservedInBiasFreeNetwork) {
  RandomEngine rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Model m = Randomize(SmallConvNet(Activation::kTanh, Activation::kLeakyRelu,
                                     /*bias=*/false),
                        300 + trial);
    const Matrix x = RandomMatrix(2, 7, rng);
    const double y = Predict(m, x);
    if (std::abs(y) < 1e-3) continue;
    const std::vector<Matrix> per_layer = RelevanceByLayer(m, x, 0.0);
    for (const Matrix& r : per_layer) {
      EXPECT_NEAR(Sum(r.values()), y, 1e-9 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST(RelevanceTest, SingleLinearLayerClosedForm) {
  RandomEngine rng(2);
  const Matrix w = RandomMatrix(2, 3, rng);
  const Matrix x = RandomMatrix(2, 3, rng);
  const Matrix r = RelevancePropagate(LinearModel(w), x, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(r[i], x[i] * w[i], 1e-12);
  }
}

TEST(RelevanceTest, ZeroInputGivesZeroMap) {
  const Model m = Randomize(
      SmallConvNet(Activation::kTanh, Activation::kTanh, /*bias=*/false), 4);
  const Matrix r = RelevancePropagate(m, Matrix(2, 7), 1e-9);
  for (double v : r.values()) EXPECT_EQ(v, 0.0);
}

TEST(RelevanceTest, ZeroDenominatorWithoutStabiliserContributesNothing) {
  // Two inputs cancel exactly at the hidden neuron; its activation is zero,
  // so it carries no relevance and the guarded division yields zeros.
  LayerSpec first = LayerSpec::Dense(2, 1, Activation::kLinear, false);
  first.weights = {1.0, -1.0};
  LayerSpec second = LayerSpec::Dense(1, 1, Activation::kRelu, true);
  second.weights = {1.0};
  second.biases = {2.0};
  Model m({1, 2}, {first, second});
  const Matrix r = RelevancePropagate(m, Matrix(1, 2, 1.0), 0.0);
  EXPECT_EQ(r(0, 0), 0.0);
  EXPECT_EQ(r(0, 1), 0.0);
  EXPECT_THROW(RelevancePropagate(m, Matrix(1, 2, 1.0), -1.0), InvalidArgument);
}

TEST(ParameterCountTest, ClosedForm) {
  ConvNetArchitecture arch;
  arch.channels = 5;
  arch.window = 11;
  arch.conv_filters = {4, 6};
  arch.kernel = 3;
  arch.dense_units = {7};
  const Model m = BuildConvNet(arch);
  const std::size_t expected = (5 * 4 * 3 + 4) + (4 * 6 * 3 + 6) +
                               (6 * 11 * 7 + 7) + (7 * 1 + 1);
  EXPECT_EQ(ParameterCount(m), expected);
}

TEST(SerializationTest, RoundTripIsExact) {
  const Model m = Randomize(SmallConvNet(Activation::kTanh, Activation::kRelu), 77)
                      .WithMetadata({{"note", "roundtrip"}});
  const Model back = ParseModel(SerializeModel(m));
  ASSERT_EQ(back.layer_count(), m.layer_count());
  for (std::size_t i = 0; i < m.layer_count(); ++i) {
    EXPECT_EQ(back.layer(i).weights, m.layer(i).weights);
    EXPECT_EQ(back.layer(i).biases, m.layer(i).biases);
    EXPECT_EQ(back.layer(i).activation, m.layer(i).activation);
  }
  EXPECT_EQ(back.metadata()["note"], "roundtrip");

  const std::string path =
      (std::filesystem::temp_directory_path() / "tsxai_model_test.json").string();
  SaveModel(m, path);
  EXPECT_EQ(SerializeModel(LoadModel(path)), SerializeModel(m));
  std::filesystem::remove(path);
}

TEST(SerializationTest, MalformedDocumentsAreRejected) {
  EXPECT_THROW(ParseModel("{not json"), ParseError);
  EXPECT_THROW(ParseModel(R"({"input_shape":[2,3]})"), ParseError);
}

TEST(TrainingTest, LossDecreasesAndIsDeterministic) {
  RandomEngine rng(31);
  const Matrix target_w = RandomMatrix(1, 4, rng);
  std::vector<TrainingExample> data;
  for (int i = 0; i < 64; ++i) {
    TrainingExample ex{RandomMatrix(1, 4, rng), 0.0};
    for (std::size_t k = 0; k < 4; ++k) ex.y += target_w[k] * ex.x[k];
    ex.y += 3.0;  // keep the relu head active
    data.push_back(ex);
  }
  Model m({1, 4}, {LayerSpec::Dense(4, 8, Activation::kTanh),
                   LayerSpec::Dense(8, 1, Activation::kRelu)});
  m = InitializeParameters(m, 5);
  std::vector<LayerSpec> layers = m.layers();
  layers.back().biases[0] = 3.0;
  m = m.WithLayers(layers);

  TrainingOptions opts;
  opts.learning_rate = 0.01;
  opts.epochs = 30;
  opts.batch_size = 8;
  opts.seed = 9;
  const TrainingResult a = Train(m, data, opts);
  const TrainingResult b = Train(m, data, opts);
  EXPECT_LT(a.epoch_loss.back(), 0.5 * a.epoch_loss.front());
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(SerializeModel(a.model), SerializeModel(b.model));
  EXPECT_NEAR(MeanSquaredError(a.model, data), a.epoch_loss.back(),
              0.5 * a.epoch_loss.back() + 1e-3);
}

TEST(TrainingTest, DivergenceIsReported) {
  std::vector<TrainingExample> data = {{Matrix(1, 1, 1e3), 1e6}};
  Model m({1, 1}, {LayerSpec::Dense(1, 1, Activation::kLinear)});
  m = InitializeParameters(m, 1);
  std::vector<LayerSpec> layers = m.layers();
  layers[0].weights = {1.0};
  m = m.WithLayers(layers);
  TrainingOptions opts;
  opts.learning_rate = 10.0;
  opts.epochs = 50;
  EXPECT_THROW(Train(m, data, opts), NumericalError);
}

}  // namespace
}  // namespace tsxai::tsmodel
