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


#include "tsxai/attribution.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"
#include "tsxai/errors.h"

namespace tsxai::attribution {
namespace {

namespace fs = std::filesystem;
using segperturb::Coalition;
using segperturb::FeatureStats;
using segperturb::Perturbation;
using tsmodel::Activation;
using tsmodel::LayerSpec;
using tsmodel::Model;
using tsmodel::Shape;
using ::tsxai::testing::LinearModel;
using ::tsxai::testing::RandomMatrix;
using ::tsxai::testing::Randomize;

// conv(F -> 3, k = 3, tanh) -> flatten -> dense(4, tanh) -> dense(1, linear).
Model TinyNet(std::size_t f, std::size_t t, std::uint64_t seed) {
  const int ft = static_cast<int>(t);
  Model shape({f, t},
              {LayerSpec::Conv1D(static_cast<int>(f), 3, 3, 1, Activation::kTanh),
               LayerSpec::Flatten(),
               LayerSpec::Dense(3 * ft, 4, Activation::kTanh),
               LayerSpec::Dense(4, 1, Activation::kLinear)});
  return Randomize(shape, seed, -0.8, 0.8);
}

// A single k = 1 conv map A = act(sum_f w_f x_f) followed by a dense readout
// with constant weight `readout`.
Model OneMapNet(std::size_t f, std::size_t t, std::vector<double> conv_w,
                Activation act, double readout) {
  LayerSpec conv =
      LayerSpec::Conv1D(static_cast<int>(f), 1, 1, 1, act, /*bias=*/false);
  conv.weights = std::move(conv_w);
  LayerSpec dense = LayerSpec::Dense(static_cast<int>(t), 1, Activation::kLinear,
                                     /*bias=*/false);
  dense.weights.assign(t, readout);
  return Model({f, t}, {conv, LayerSpec::Flatten(), dense});
}

ExplainerConfig SurrogateConfig(Method method, std::size_t segments,
                                std::size_t neighborhood) {
  ExplainerConfig c;
  c.method = method;
  c.segments_per_channel = segments;
  c.neighborhood = neighborhood;
  c.perturbation = Perturbation::kZero;
  c.seed = 42;
  return c;
}

// ---------------------------------------------------------------------------

TEST(SaliencyTest, LinearModelGivesWeights) {
  RandomEngine rng(1);
  const Matrix w = RandomMatrix(3, 7, rng);
  const Matrix x = RandomMatrix(3, 7, rng);
  const AttributionMap map = Saliency(LinearModel(w), x);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(map.values[i], w[i], 1e-15);
  }
  EXPECT_EQ(map.method, "saliency");
}

TEST(SaliencyTest, MatchesFiniteDifferencesAndIsDeterministic) {
  const Model model = TinyNet(2, 10, 3);
  RandomEngine rng(4);
  const Matrix x = RandomMatrix(2, 10, rng);
  const AttributionMap a = Saliency(model, x);
  EXPECT_LT(testing::MaxRelativeError(a.values, testing::NumericGradient(model, x),
                                      1e-4),
            1e-5);
  EXPECT_EQ(Saliency(model, x).values, a.values);
}

// ---------------------------------------------------------------------------

TEST(GradCamTest, ClassicPoolingWhenBetaSigmaZero) {
  const Model model = TinyNet(3, 12, 7);
  RandomEngine rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = RandomMatrix(3, 12, rng);
    // Independent evaluation: pooled weights from the feature-map gradient,
    // weighted sum of maps, ReLU, broadcast to every input row.
    const tsmodel::ForwardResult fwd = tsmodel::Forward(model, x);
    const Matrix& a = fwd.trace.post[0];
    const auto fm = tsmodel::ComputeFeatureMapGradient(model, x, 0);
    ASSERT_EQ(fm.activation, a);
    std::vector<double> alpha(a.rows(), 0.0);
    for (std::size_t k = 0; k < a.rows(); ++k) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += fm.gradient(k, t);
      alpha[k] = s / static_cast<double>(a.cols());
    }
    const AttributionMap map = GradCam(model, x, 0, 0.0, 0.0);
    ASSERT_EQ(map.values.rows(), 3u);
    ASSERT_EQ(map.values.cols(), 12u);
    for (std::size_t t = 0; t < a.cols(); ++t) {
      double v = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) v += alpha[k] * a(k, t);
      v = std::max(v, 0.0);
      for (std::size_t f = 0; f < 3; ++f) EXPECT_EQ(map.values(f, t), v);
    }
  }
}

TEST(GradCamTest, FeatureMapGradientMatchesFiniteDifferences) {
  const Model model = TinyNet(2, 8, 9);
  RandomEngine rng(10);
  const Matrix x = RandomMatrix(2, 8, rng);
  const auto fm = tsmodel::ComputeFeatureMapGradient(model, x, 0);
  Matrix probe = fm.activation;
  Matrix numeric(probe.rows(), probe.cols());
  const double h = 1e-5;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = tsmodel::ForwardFrom(model, 1, probe);
    probe[i] = orig - h;
    const double down = tsmodel::ForwardFrom(model, 1, probe);
    probe[i] = orig;
    numeric[i] = (up - down) / (2 * h);
  }
  EXPECT_LT(testing::MaxRelativeError(fm.gradient, numeric, 1e-4), 1e-6);
}

TEST(GradCamTest, NegativeReadoutClampsToZero) {
  const Model model =
      OneMapNet(2, 6, {1.0, 0.5}, Activation::kRelu, /*readout=*/-0.3);
  RandomEngine rng(11);
  const Matrix x = RandomMatrix(2, 6, rng, 0.1, 2.0);
  for (double beta : {0.0, 0.5, 1.0}) {
    for (double sigma : {0.0, 0.5, 1.0}) {
      const AttributionMap map = GradCam(model, x, 0, beta, sigma);
      for (double v : map.values.values()) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(GradCamTest, SingleMapIsProportionalToActivation) {
  const double c = 0.7;
  const Model model = OneMapNet(2, 9, {0.4, 1.1}, Activation::kLinear, c);
  RandomEngine rng(12);
  const Matrix x = RandomMatrix(2, 9, rng, 0.0, 1.0);
  const AttributionMap map = GradCam(model, x, 0, 0.0, 0.0);
  for (std::size_t t = 0; t < 9; ++t) {
    const double a = 0.4 * x(0, t) + 1.1 * x(1, t);
    for (std::size_t f = 0; f < 2; ++f) {
      EXPECT_NEAR(map.values(f, t), c * a, 1e-14);
    }
  }
}

TEST(GradCamTest, LinearInBetaAndSigma) {
  const Model model = TinyNet(3, 10, 13);
  RandomEngine rng(14);
  const Matrix x = RandomMatrix(3, 10, rng);
  const GradCamComponents parts = ComputeGradCamComponents(model, x, 0);
  const Matrix base = CombineGradCam(parts, 0.0, 0.0);
  for (double beta : {0.1, 0.35, 1.0}) {
    const Matrix with_beta = CombineGradCam(parts, beta, 0.0);
    for (std::size_t f = 0; f < 3; ++f) {
      for (std::size_t t = 0; t < 10; ++t) {
        EXPECT_EQ(with_beta(f, t), base(f, t) + beta * parts.time(0, t));
      }
    }
  }
  const Matrix with_sigma = CombineGradCam(parts, 0.0, 0.6);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t t = 0; t < 10; ++t) {
      EXPECT_EQ(with_sigma(f, t), base(f, t) + 0.6 * parts.channel(f, t));
    }
  }
}

TEST(GradCamTest, TimeComponentIsElementwiseProduct) {
  const Model model = TinyNet(2, 7, 15);
  RandomEngine rng(16);
  const Matrix x = RandomMatrix(2, 7, rng);
  const GradCamComponents parts = ComputeGradCamComponents(model, x, 0);
  const auto fm = tsmodel::ComputeFeatureMapGradient(model, x, 0);
  for (std::size_t t = 0; t < 7; ++t) {
    double v = 0.0;
    for (std::size_t k = 0; k < 3; ++k) v += fm.gradient(k, t) * fm.activation(k, t);
    EXPECT_NEAR(parts.time(0, t), v, 1e-15);
  }
}

TEST(GradCamTest, ChannelCorrespondenceFollowsKernelMass) {
  // Channel 0 carries three times the kernel mass of channel 1.
  const Model model = OneMapNet(2, 5, {0.75, -0.25}, Activation::kLinear, 1.0);
  const Matrix x(2, 5, 1.0);
  const GradCamComponents parts = ComputeGradCamComponents(model, x, 0);
  EXPECT_DOUBLE_EQ(parts.correspondence(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(parts.correspondence(0, 1), 0.25);
  // g = 1, A = 0.5: channel[f] = F * rho(f) * A.
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_DOUBLE_EQ(parts.channel(0, t), 2 * 0.75 * 0.5);
    EXPECT_DOUBLE_EQ(parts.channel(1, t), 2 * 0.25 * 0.5);
  }
}

TEST(GradCamTest, RowsOfCorrespondenceSumToOne) {
  const Model model = tsmodel::InitializeParameters(
      tsmodel::BuildConvNet({.channels = 4,
                             .window = 16,
                             .conv_filters = {5, 6, 7},
                             .dense_units = {8}}),
      3);
  RandomEngine rng(2);
  const Matrix x = RandomMatrix(4, 16, rng);
  for (std::size_t layer : model.ConvLayerIndices()) {
    const GradCamComponents parts = ComputeGradCamComponents(model, x, layer);
    for (std::size_t k = 0; k < parts.correspondence.rows(); ++k) {
      double s = 0.0;
      for (double v : parts.correspondence.row(k)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
    const AttributionMap map = GradCam(model, x, layer, 0.4, 0.3);
    for (double v : map.values.values()) EXPECT_GE(v, 0.0);
  }
}

TEST(GradCamTest, InvalidArgumentsThrow) {
  const Model model = TinyNet(2, 6, 1);
  const Matrix x(2, 6, 0.1);
  EXPECT_THROW(GradCam(model, x, 2, 0.0, 0.0), InvalidArgument);  // dense
  EXPECT_THROW(GradCam(model, x, 0, 1.5, 0.0), InvalidArgument);
  EXPECT_THROW(GradCam(model, x, 0, 0.0, -0.1), InvalidArgument);
}

TEST(InterpolateTest, AlignedEndPoints) {
  const Matrix m(1, 2, {0.0, 2.0});
  const Matrix out = InterpolateRows(m, 5);
  const std::vector<double> want = {0.0, 0.5, 1.0, 1.5, 2.0};
  for (std::size_t t = 0; t < 5; ++t) EXPECT_DOUBLE_EQ(out(0, t), want[t]);
  EXPECT_EQ(InterpolateRows(out, 5), out);
}

// ---------------------------------------------------------------------------

TEST(LrpTest, ConservationAndClosedForm) {
  RandomEngine rng(5);
  const Matrix w = RandomMatrix(2, 6, rng);
  const Matrix x = RandomMatrix(2, 6, rng);
  const AttributionMap lin = Lrp(LinearModel(w), x, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(lin.values[i], x[i] * w[i], 1e-14);
  }

  LayerSpec conv = LayerSpec::Conv1D(2, 3, 3, 1, Activation::kTanh, false);
  LayerSpec dense = LayerSpec::Dense(18, 1, Activation::kLinear, false);
  const Model net = Randomize(
      Model({2, 6}, {conv, LayerSpec::Flatten(), dense}), 6);
  const AttributionMap map = Lrp(net, x, 1e-12);
  double total = 0.0;
  for (double v : map.values.values()) total += v;
  const double y = tsmodel::Predict(net, x);
  EXPECT_NEAR(total, y, 1e-6 * std::max(1.0, std::abs(y)));

  const AttributionMap zero = Lrp(net, Matrix(2, 6, 0.0), 1e-9);
  for (double v : zero.values.values()) EXPECT_EQ(v, 0.0);
}

// ---------------------------------------------------------------------------

TEST(ShapKernelTest, HandValues) {
  EXPECT_DOUBLE_EQ(ShapKernelWeight(ShapKernel::kLiteral, 4, 1), 0.25);
  EXPECT_DOUBLE_EQ(ShapKernelWeight(ShapKernel::kStandard, 4, 1), 0.25);
  EXPECT_DOUBLE_EQ(ShapKernelWeight(ShapKernel::kLiteral, 4, 2), 0.25);
  EXPECT_DOUBLE_EQ(ShapKernelWeight(ShapKernel::kStandard, 4, 2), 0.125);
  EXPECT_THROW(ShapKernelWeight(ShapKernel::kStandard, 4, 0), InvalidArgument);
  EXPECT_THROW(ShapKernelWeight(ShapKernel::kStandard, 4, 4), InvalidArgument);
}

TEST(ExactShapleyTest, SingleSegment) {
  const Model model = TinyNet(1, 6, 20);
  RandomEngine rng(21);
  const Matrix x = RandomMatrix(1, 6, rng);
  const auto p = segperturb::UniformPartition(1, 6, 6);
  const ShapleyValues s =
      ExactShapley(model, x, p, Perturbation::kZero, FeatureStats{});
  ASSERT_EQ(s.phi.size(), 1u);
  EXPECT_NEAR(s.phi[0],
              tsmodel::Predict(model, x) - tsmodel::Predict(model, Matrix(1, 6)),
              1e-14);
}

TEST(ExactShapleyTest, AdditiveModelGivesOwnContribution) {
  RandomEngine rng(22);
  const Matrix w = RandomMatrix(2, 8, rng);
  const Matrix x = RandomMatrix(2, 8, rng);
  const auto p = segperturb::UniformPartition(2, 8, 3);
  const ShapleyValues s = ExactShapley(LinearModel(w), x, p, Perturbation::kOne,
                                       FeatureStats{});
  ASSERT_EQ(s.phi.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& seg = p.segments[i];
    double own = 0.0;
    for (std::size_t t = seg.start; t < seg.end; ++t) {
      own += w(seg.channel, t) * (x(seg.channel, t) - 1.0);
    }
    EXPECT_NEAR(s.phi[i], own, 1e-12);
  }
}

TEST(ExactShapleyTest, EfficiencyAndLimits) {
  const Model model = TinyNet(2, 8, 23);
  RandomEngine rng(24);
  const Matrix x = RandomMatrix(2, 8, rng);
  const auto p = segperturb::UniformPartition(2, 8, 2);
  const ShapleyValues s =
      ExactShapley(model, x, p, Perturbation::kMean, FeatureStats{});
  double total = s.baseline;
  for (double v : s.phi) total += v;
  EXPECT_NEAR(total, s.prediction, 1e-12);
  EXPECT_THROW(ExactShapley(model, x, segperturb::UniformPartition(2, 8, 1),
                            Perturbation::kZero, FeatureStats{}),
               InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(KernelShapTest, MatchesExactOnLinearModel) {
  RandomEngine rng(30);
  const Matrix w = RandomMatrix(2, 10, rng);
  const Matrix x = RandomMatrix(2, 10, rng);
  const Model model = LinearModel(w);
  for (std::size_t per : {1, 2, 5}) {
    const std::size_t m = 2 * per;
    ExplainerConfig c = SurrogateConfig(Method::kKernelShap, per, 1024);
    for (ShapKernel kernel : {ShapKernel::kStandard, ShapKernel::kLiteral}) {
      c.shap_kernel = kernel;
      const SurrogateResult r = KernelShap(model, x, c, FeatureStats{});
      const ShapleyValues exact = ExactShapley(model, x, r.partition,
                                               Perturbation::kZero, FeatureStats{});
      for (std::size_t i = 0; i < m; ++i) {
        EXPECT_NEAR(r.coefficients[i], exact.phi[i], 1e-6);
      }
    }
  }
}

TEST(KernelShapTest, OnlyStandardKernelMatchesExactOnNonlinearModel) {
  const Model model = TinyNet(2, 12, 31);
  RandomEngine rng(32);
  const Matrix x = RandomMatrix(2, 12, rng, -2.0, 2.0);
  ExplainerConfig c = SurrogateConfig(Method::kKernelShap, 3, 256);
  const SurrogateResult standard = KernelShap(model, x, c, FeatureStats{});
  const ShapleyValues exact = ExactShapley(model, x, standard.partition,
                                           Perturbation::kZero, FeatureStats{});
  c.shap_kernel = ShapKernel::kLiteral;
  const SurrogateResult literal = KernelShap(model, x, c, FeatureStats{});
  double worst_standard = 0.0, worst_literal = 0.0;
  for (std::size_t i = 0; i < exact.phi.size(); ++i) {
    worst_standard = std::max(worst_standard,
                              std::abs(standard.coefficients[i] - exact.phi[i]));
    worst_literal = std::max(worst_literal,
                             std::abs(literal.coefficients[i] - exact.phi[i]));
  }
  EXPECT_LT(worst_standard, 1e-9);
  EXPECT_GT(worst_literal, 1e-6);
}

TEST(KernelShapTest, SymmetricSegmentsShareCredit) {
  // Identical halves and identical readout weights for both halves.
  LayerSpec conv = LayerSpec::Conv1D(1, 2, 1, 1, Activation::kTanh, false);
  conv.weights = {0.8, -1.3};
  LayerSpec dense = LayerSpec::Dense(8, 1, Activation::kLinear, false);
  // Flattened layout is [map][t]: map 0 t0..t3, map 1 t0..t3.
  dense.weights = {0.5, -0.2, 0.5, -0.2, 0.9, 0.4, 0.9, 0.4};
  const Model model({1, 4}, {conv, LayerSpec::Flatten(), dense});
  const Matrix x(1, 4, {0.3, -1.2, 0.3, -1.2});
  const SurrogateResult r = KernelShap(
      model, x, SurrogateConfig(Method::kKernelShap, 2, 8), FeatureStats{});
  ASSERT_EQ(r.coefficients.size(), 2u);
  EXPECT_NEAR(r.coefficients[0], r.coefficients[1], 1e-9);
}

TEST(KernelShapTest, EfficiencyHoldsWhenSampling) {
  const Model model = TinyNet(3, 16, 33);
  RandomEngine rng(34);
  const Matrix x = RandomMatrix(3, 16, rng);
  const FeatureStats stats = FeatureStats::FromSamples({x, RandomMatrix(3, 16, rng)});
  ExplainerConfig c = SurrogateConfig(Method::kKernelShap, 8, 64);  // M = 24
  c.perturbation = Perturbation::kNormalNoise;
  const SurrogateResult r = KernelShap(model, x, c, stats);
  double total = r.map.metadata.at("phi0").get<double>();
  for (double v : r.coefficients) total += v;
  EXPECT_NEAR(total, tsmodel::Predict(model, x), 1e-8);
}

TEST(KernelShapTest, RejectsTooFewSegmentsOrSamples) {
  const Model model = TinyNet(1, 6, 35);
  const Matrix x(1, 6, 0.2);
  EXPECT_THROW(KernelShap(model, x, SurrogateConfig(Method::kKernelShap, 1, 64),
                          FeatureStats{}),
               InvalidArgument);
  EXPECT_THROW(KernelShap(model, x, SurrogateConfig(Method::kKernelShap, 3, 4),
                          FeatureStats{}),
               InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(LimeTest, AdditiveModelTwoSegments) {
  const Matrix ones(1, 6, 1.0);
  const Model model = LinearModel(ones);  // y = sum x
  const Matrix x(1, 6, {0.5, -1.0, 2.0, 0.25, 0.75, 3.0});
  ExplainerConfig c = SurrogateConfig(Method::kLime, 2, 4);
  c.ridge = 0.0;
  const SurrogateResult r = Lime(model, x, c, FeatureStats{});
  ASSERT_EQ(r.coefficients.size(), 2u);
  EXPECT_NEAR(r.coefficients[0], 1.5, 1e-12);
  EXPECT_NEAR(r.coefficients[1], 4.0, 1e-12);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(r.map.values(0, t), 1.5, 1e-12);
}

TEST(LimeTest, ConstantModelGivesZeros) {
  LayerSpec dense = LayerSpec::Dense(8, 1, Activation::kLinear, true);
  dense.weights.assign(8, 0.0);
  dense.biases = {3.5};
  const Model model({2, 4}, {LayerSpec::Flatten(), dense});
  RandomEngine rng(40);
  const Matrix x = RandomMatrix(2, 4, rng);
  const SurrogateResult r =
      Lime(model, x, SurrogateConfig(Method::kLime, 2, 32), FeatureStats{});
  for (double v : r.coefficients) EXPECT_EQ(v, 0.0);
}

TEST(LimeTest, RecoversMaskLinearModelExactly) {
  RandomEngine rng(41);
  const Matrix w = RandomMatrix(2, 9, rng);
  const Matrix x = RandomMatrix(2, 9, rng);
  const Model model = LinearModel(w);
  ExplainerConfig c = SurrogateConfig(Method::kLime, 3, 64);  // 2^6 = 64
  c.ridge = 0.0;
  const SurrogateResult r = Lime(model, x, c, FeatureStats{});
  const double fx = tsmodel::Predict(model, x);
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    Coalition z(6);
    double g = fx + r.intercept;
    for (std::size_t i = 0; i < 6; ++i) {
      z[i] = (mask >> i) & 1;
      if (!z[i]) g += r.coefficients[i];
    }
    RandomEngine unused(0);
    const Matrix xp = segperturb::Perturb(x, r.partition, z, Perturbation::kZero,
                                          FeatureStats{}, unused);
    EXPECT_NEAR(g, tsmodel::Predict(model, xp), 1e-8);
  }
}

TEST(LimeTest, DeterministicInSeed) {
  const Model model = TinyNet(2, 16, 42);
  RandomEngine rng(43);
  const Matrix x = RandomMatrix(2, 16, rng);
  const FeatureStats stats = FeatureStats::FromSamples({x, RandomMatrix(2, 16, rng)});
  ExplainerConfig c = SurrogateConfig(Method::kLime, 8, 64);
  c.perturbation = Perturbation::kUniformNoise;
  const MethodExplainer explainer(model, c, stats);
  const AttributionMap a = explainer.Explain(x, 7);
  EXPECT_EQ(explainer.Explain(x, 7).values, a.values);
  EXPECT_NE(explainer.Explain(x, 8).values, a.values);
}

TEST(LimeTest, NeighborhoodTooSmallThrows) {
  const Model model = TinyNet(1, 8, 44);
  EXPECT_THROW(Lime(model, Matrix(1, 8, 0.1),
                    SurrogateConfig(Method::kLime, 4, 5), FeatureStats{}),
               InvalidArgument);
}

// ---------------------------------------------------------------------------

TEST(ExplainerTest, DispatchMatchesFreeFunctions) {
  const Model model = TinyNet(2, 8, 50);
  RandomEngine rng(51);
  const Matrix x = RandomMatrix(2, 8, rng);
  ExplainerConfig c;
  c.method = Method::kSaliency;
  EXPECT_EQ(MethodExplainer(model, c).Explain(x, 0).values,
            Saliency(model, x).values);
  c.method = Method::kGradCam;
  c.beta = 0.3;
  EXPECT_EQ(MethodExplainer(model, c).Explain(x, 0).values,
            GradCam(model, x, 0, 0.3, 0.0).values);
  c.method = Method::kLrp;
  EXPECT_EQ(MethodExplainer(model, c).Explain(x, 0).values,
            Lrp(model, x, c.epsilon).values);
  c.method = Method::kGradCam;
  c.layer_index = 2;
  EXPECT_THROW(MethodExplainer(model, c), ConfigError);
}

TEST(ExplainerConfigTest, JsonRoundTrip) {
  ExplainerConfig c = SurrogateConfig(Method::kKernelShap, 5, 77);
  c.segmentation = segperturb::SegmentationKind::kL2Optimal;
  c.perturbation = Perturbation::kNormalNoise;
  c.shap_kernel = ShapKernel::kLiteral;
  c.kernel_width = 0.4;
  const ExplainerConfig back = ExplainerConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  EXPECT_EQ(back.Label(), "SHAP");
  EXPECT_EQ(back.PerturbationLabel(), "normal_noise");
  c.beta = 2.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  EXPECT_THROW(ParseMethod("occlusion"), ConfigError);
}

TEST(ExportTest, CsvAndPgm) {
  AttributionMap map;
  map.values = Matrix(2, 3, {-1.0, 0.0, 1.0, 0.5, 0.25, 1.0 / 3.0});
  map.method = "saliency";
  const fs::path dir = fs::path(::testing::TempDir()) / "tsxai_export";
  fs::create_directories(dir);
  WriteMapCsv(map, (dir / "m.csv").string());
  std::ifstream csv(dir / "m.csv");
  std::string line;
  std::vector<double> values;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
  }
  EXPECT_EQ(values, map.values.storage());

  WriteMapPgm(map, (dir / "m.pgm").string(), (dir / "m.json").string());
  std::ifstream pgm(dir / "m.pgm", std::ios::binary);
  std::string magic;
  int w = 0, h = 0, depth = 0;
  pgm >> magic >> w >> h >> depth;
  pgm.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);
  EXPECT_EQ(depth, 255);
  std::string pixels(6, '\0');
  pgm.read(pixels.data(), 6);
  EXPECT_EQ(static_cast<unsigned char>(pixels[0]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pixels[2]), 255);
  const nlohmann::json side = nlohmann::json::parse(std::ifstream(dir / "m.json"));
  EXPECT_EQ(side.at("min").get<double>(), -1.0);
  EXPECT_EQ(side.at("max").get<double>(), 1.0);
}

}  // namespace
}  // namespace tsxai::attribution
