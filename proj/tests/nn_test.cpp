#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "penet/mlp.hpp"
#include "penet/normalize.hpp"
#include "penet/rng.hpp"
#include "penet/train.hpp"
#include "test_oracles.hpp"

using namespace penet;
namespace oracle = testing_oracles;

namespace {

// Central finite differences of a scalar loss with respect to every
// parameter of the network.
template <class Loss>
std::vector<double> fd_param_grads(Mlp& mlp, const Loss& loss, double h = 1e-6) {
  std::vector<double> grads;
  for (double* p : oracle::parameter_pointers(mlp)) {
    double saved = *p;
    *p = saved + h;
    double up = loss();
    *p = saved - h;
    double down = loss();
    *p = saved;
    grads.push_back((up - down) / (2.0 * h));
  }
  return grads;
}

}  // namespace

TEST(MlpInit, DeterministicPerSeed) {
  auto a = Mlp::init({6, 10, 1}, Activation::Tanh, 77);
  auto b = Mlp::init({6, 10, 1}, Activation::Tanh, 77);
  ASSERT_EQ(a.layers.size(), b.layers.size());
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    EXPECT_EQ(a.layers[l].W, b.layers[l].W);
    EXPECT_EQ(a.layers[l].b, b.layers[l].b);
  }
  auto c = Mlp::init({6, 10, 1}, Activation::Tanh, 78);
  EXPECT_NE(a.layers[0].W, c.layers[0].W);
}

TEST(MlpInit, ShapeSubnetDimensions) {
  auto net = Mlp::init({3, 10, 2}, Activation::Tanh, 1);
  EXPECT_EQ(net.input_dim(), 3u);
  EXPECT_EQ(net.output_dim(), 2u);
  EXPECT_EQ(net.layers[0].W.size(), 30u);
  EXPECT_EQ(net.layers[1].W.size(), 20u);
  for (const auto& layer : net.layers)
    for (double b : layer.b) EXPECT_DOUBLE_EQ(b, 0.0);
}

TEST(MlpInit, RejectsDegenerateDims) {
  EXPECT_THROW(Mlp::init({6}, Activation::Tanh, 0), std::invalid_argument);
  EXPECT_THROW(Mlp::init({6, 0, 1}, Activation::Tanh, 0), std::invalid_argument);
}

TEST(MlpForward, ZeroParametersGiveZeroOutput) {
  auto net = Mlp::init({4, 5, 2}, Activation::Tanh, 3);
  for (auto& layer : net.layers) {
    std::fill(layer.W.begin(), layer.W.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  auto y = net.forward(std::vector<double>{1.0, -2.0, 3.0, 0.5});
  for (double v : y) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(MlpForward, IdentityLinearLayer) {
  Mlp net;
  net.layer_dims = {3, 3};
  net.layers.push_back({{1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}});
  auto y = net.forward(std::vector<double>{0.3, -1.5, 2.0});
  EXPECT_DOUBLE_EQ(y[0], 0.3);
  EXPECT_DOUBLE_EQ(y[1], -1.5);
  EXPECT_DOUBLE_EQ(y[2], 2.0);
}

TEST(MlpForward, MatchesNaiveEvaluation) {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    auto net = Mlp::init({5, 8, 4, 2}, Activation::Sigmoid, 100 + i);
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    auto got = net.forward(x);
    auto want = oracle::naive_forward(net, x);
    for (std::size_t c = 0; c < got.size(); ++c)
      EXPECT_NEAR(got[c], want[c], 1e-14);
  }
}

TEST(MlpForward, RejectsDimensionMismatch) {
  auto net = Mlp::init({3, 4, 1}, Activation::Tanh, 0);
  EXPECT_THROW(net.forward(std::vector<double>{1.0, 2.0}), schema_error);
}

TEST(MlpBackward, ZeroUpstreamGivesZeroGradients) {
  auto net = Mlp::init({3, 6, 2}, Activation::Tanh, 5);
  ForwardCache cache;
  forward_cached(net, std::vector<double>{0.1, 0.2, 0.3}, cache);
  Gradients grads = Gradients::zeros_like(net);
  std::vector<double> input_grad;
  backward(net, cache, std::vector<double>{0.0, 0.0}, grads, &input_grad);
  for (const auto& layer : grads.layers) {
    for (double g : layer.W) EXPECT_DOUBLE_EQ(g, 0.0);
    for (double g : layer.b) EXPECT_DOUBLE_EQ(g, 0.0);
  }
  for (double g : input_grad) EXPECT_DOUBLE_EQ(g, 0.0);
}

TEST(MlpBackward, LinearNetInputGradIsTransposeTimesUpstream) {
  Mlp net;
  net.layer_dims = {2, 2};
  net.layers.push_back({{1.5, -0.5, 2.0, 0.25}, {0.1, -0.2}});
  ForwardCache cache;
  forward_cached(net, std::vector<double>{0.7, -0.3}, cache);
  Gradients grads = Gradients::zeros_like(net);
  std::vector<double> input_grad;
  std::vector<double> upstream{2.0, -1.0};
  backward(net, cache, upstream, grads, &input_grad);
  EXPECT_DOUBLE_EQ(input_grad[0], 1.5 * 2.0 + 2.0 * -1.0);
  EXPECT_DOUBLE_EQ(input_grad[1], -0.5 * 2.0 + 0.25 * -1.0);
}

TEST(MlpBackward, MatchesFiniteDifferencesOnRandomNets) {
  Rng rng(21);
  const Activation acts[] = {Activation::Tanh, Activation::Sigmoid,
                             Activation::Relu};
  for (int trial = 0; trial < 24; ++trial) {
    std::vector<std::size_t> dims{2 + trial % 5, 3 + trial % 8, 1 + trial % 3};
    auto net = Mlp::init(dims, acts[trial % 3], 500 + trial);
    std::vector<double> x(dims.front());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<double> target(dims.back());
    for (double& v : target) v = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    auto y = forward_cached(net, x, cache);
    std::vector<double> upstream(y.size());
    for (std::size_t c = 0; c < y.size(); ++c)
      upstream[c] = 2.0 * (y[c] - target[c]) / static_cast<double>(y.size());
    Gradients grads = Gradients::zeros_like(net);
    std::vector<double> input_grad;
    backward(net, cache, upstream, grads, &input_grad);
    auto analytic = oracle::flatten(grads);

    auto loss = [&] { return mse(net.forward(x), target); };
    auto numeric = fd_param_grads(net, loss);
    ASSERT_EQ(analytic.size(), numeric.size());
    for (std::size_t k = 0; k < analytic.size(); ++k)
      EXPECT_TRUE(oracle::grad_close(analytic[k], numeric[k]))
          << "trial " << trial << " param " << k << ": " << analytic[k]
          << " vs " << numeric[k];

    for (std::size_t j = 0; j < x.size(); ++j) {
      double saved = x[j];
      x[j] = saved + 1e-6;
      double up = mse(net.forward(x), target);
      x[j] = saved - 1e-6;
      double down = mse(net.forward(x), target);
      x[j] = saved;
      EXPECT_TRUE(oracle::grad_close(input_grad[j], (up - down) / 2e-6));
    }
  }
}

// Gradient of a stacked pair chains through the inner network's input
// gradient; this is the mechanism the assembled predictor trains with.
TEST(MlpBackward, CompositionChainsMatchEndToEndFiniteDifferences) {
  auto inner = Mlp::init({3, 6, 2}, Activation::Tanh, 900);
  auto outer = Mlp::init({2, 5, 1}, Activation::Tanh, 901);
  std::vector<double> x{0.2, -0.4, 0.8};
  double target = 0.3;

  ForwardCache cache_in, cache_out;
  auto mid = forward_cached(inner, x, cache_in);
  auto y = forward_cached(outer, mid, cache_out);
  double d = y[0] - target;

  Gradients grads_out = Gradients::zeros_like(outer);
  Gradients grads_in = Gradients::zeros_like(inner);
  std::vector<double> mid_grad, input_grad;
  backward(outer, cache_out, std::vector<double>{2.0 * d}, grads_out, &mid_grad);
  backward(inner, cache_in, mid_grad, grads_in, &input_grad);

  auto loss = [&] {
    auto y2 = outer.forward(inner.forward(x));
    return (y2[0] - target) * (y2[0] - target);
  };
  auto analytic_in = oracle::flatten(grads_in);
  auto numeric_in = fd_param_grads(inner, loss);
  for (std::size_t k = 0; k < analytic_in.size(); ++k)
    EXPECT_TRUE(oracle::grad_close(analytic_in[k], numeric_in[k]));
  auto analytic_out = oracle::flatten(grads_out);
  auto numeric_out = fd_param_grads(outer, loss);
  for (std::size_t k = 0; k < analytic_out.size(); ++k)
    EXPECT_TRUE(oracle::grad_close(analytic_out[k], numeric_out[k]));

  for (std::size_t j = 0; j < x.size(); ++j) {
    double saved = x[j];
    x[j] = saved + 1e-6;
    double up = loss();
    x[j] = saved - 1e-6;
    double down = loss();
    x[j] = saved;
    EXPECT_TRUE(oracle::grad_close(input_grad[j], (up - down) / 2e-6));
  }
}

// Adam ------------------------------------------------------------------------

TEST(Adam, ZeroGradientsLeaveFreshParametersUnchanged) {
  auto net = Mlp::init({2, 3, 1}, Activation::Tanh, 8);
  auto before = net;
  AdamState state = AdamState::for_mlp(net);
  adam_step(net, Gradients::zeros_like(net), state, 0.01);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    EXPECT_EQ(net.layers[l].W, before.layers[l].W);
    EXPECT_EQ(net.layers[l].b, before.layers[l].b);
  }
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepMagnitudeEqualsLearningRate) {
  Mlp net;
  net.layer_dims = {1, 1};
  net.layers.push_back({{0.0}, {0.0}});
  AdamState state = AdamState::for_mlp(net);
  Gradients grads = Gradients::zeros_like(net);
  grads.layers[0].W[0] = 1.0;
  adam_step(net, grads, state, 0.005);
  EXPECT_NEAR(net.layers[0].W[0], -0.005, 1e-10);
  EXPECT_DOUBLE_EQ(net.layers[0].b[0], 0.0);
}

TEST(Adam, DeterministicFromCopiedState) {
  auto net_a = Mlp::init({2, 4, 1}, Activation::Tanh, 9);
  auto net_b = net_a;
  Gradients grads = Gradients::zeros_like(net_a);
  for (auto& layer : grads.layers)
    for (double& g : layer.W) g = 0.25;
  AdamState state_a = AdamState::for_mlp(net_a);
  adam_step(net_a, grads, state_a, 0.01);
  AdamState state_b = AdamState::for_mlp(net_b);
  adam_step(net_b, grads, state_b, 0.01);
  EXPECT_EQ(net_a.layers[0].W, net_b.layers[0].W);
  EXPECT_EQ(state_a.step, state_b.step);
}

TEST(Adam, RejectsNonFiniteGradients) {
  auto net = Mlp::init({2, 3, 1}, Activation::Tanh, 10);
  AdamState state = AdamState::for_mlp(net);
  Gradients grads = Gradients::zeros_like(net);
  grads.layers[0].W[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(net, grads, state, 0.01), divergence_error);
}

// Training loop ---------------------------------------------------------------

TEST(Fit, ZeroEpochsLeaveParametersUnchanged) {
  auto net = Mlp::init({2, 4, 1}, Activation::Tanh, 12);
  auto before = net;
  TrainConfig cfg;
  cfg.epochs = 0;
  auto result = fit(net, {{0.1, 0.2}, {0.3, 0.4}}, {{0.5}, {0.6}}, cfg);
  EXPECT_TRUE(result.epoch_mse.empty());
  EXPECT_EQ(net.layers[0].W, before.layers[0].W);
}

TEST(Fit, SingleSampleConverges) {
  auto net = Mlp::init({2, 6, 1}, Activation::Tanh, 13);
  TrainConfig cfg;
  cfg.minibatch = 1;
  cfg.initial_lr = 0.02;
  cfg.lr_decay = 1.0;
  cfg.epochs = 400;
  cfg.seed = 3;
  auto result = fit(net, {{0.25, 0.75}}, {{0.4}}, cfg);
  EXPECT_LT(result.epoch_mse.back(), 1e-4);
}

TEST(Fit, DeterministicForFixedSeed) {
  std::vector<std::vector<double>> X, Y;
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    X.push_back({rng.uniform01(), rng.uniform01(), rng.uniform01()});
    Y.push_back({X.back()[0] + 0.5 * X.back()[1]});
  }
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 99;
  auto net_a = Mlp::init({3, 5, 1}, Activation::Tanh, 50);
  auto net_b = Mlp::init({3, 5, 1}, Activation::Tanh, 50);
  auto ra = fit(net_a, X, Y, cfg);
  auto rb = fit(net_b, X, Y, cfg);
  for (std::size_t l = 0; l < net_a.layers.size(); ++l)
    EXPECT_EQ(net_a.layers[l].W, net_b.layers[l].W);
  EXPECT_EQ(ra.epoch_mse, rb.epoch_mse);
}

TEST(Fit, LearningRateScheduleDropsByPeriod) {
  TrainConfig cfg;
  cfg.initial_lr = 0.005;
  cfg.lr_decay = 0.9;
  cfg.lr_drop_period = 20;
  EXPECT_DOUBLE_EQ(cfg.lr_at(0), 0.005);
  EXPECT_DOUBLE_EQ(cfg.lr_at(19), 0.005);
  EXPECT_DOUBLE_EQ(cfg.lr_at(20), 0.0045);
  EXPECT_DOUBLE_EQ(cfg.lr_at(41), 0.005 * 0.81);
}

TEST(Fit, RejectsEmptyData) {
  auto net = Mlp::init({2, 3, 1}, Activation::Tanh, 1);
  TrainConfig cfg;
  EXPECT_THROW(fit(net, {}, {}, cfg), std::invalid_argument);
}

// Normalizer ------------------------------------------------------------------

TEST(NormalizerTest, MapsColumnToUnitInterval) {
  auto norm = Normalizer::fit({{0.0}, {5.0}, {10.0}}, {"x"});
  EXPECT_DOUBLE_EQ(norm.apply1(0.0), 0.0);
  EXPECT_DOUBLE_EQ(norm.apply1(5.0), 0.5);
  EXPECT_DOUBLE_EQ(norm.apply1(10.0), 1.0);
}

TEST(NormalizerTest, RoundTripIsIdentity) {
  Rng rng(123);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i)
    rows.push_back({rng.uniform(-5.0, 5.0), rng.uniform(100.0, 900.0)});
  auto norm = Normalizer::fit(rows);
  for (const auto& row : rows) {
    auto back = norm.invert(norm.apply(row));
    for (std::size_t c = 0; c < row.size(); ++c)
      EXPECT_NEAR(back[c], row[c], 1e-12 * std::max(1.0, std::abs(row[c])));
  }
}

TEST(NormalizerTest, ConstantFeatureNamesColumnInError) {
  try {
    Normalizer::fit({{1.0, 3.0}, {2.0, 3.0}}, {"Do", "T"});
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("T"), std::string::npos);
  }
}

TEST(NormalizerTest, OutOfRangeValuesPassThroughWithoutClipping) {
  auto norm = Normalizer::fit({{0.0}, {10.0}});
  EXPECT_DOUBLE_EQ(norm.apply1(20.0), 2.0);
  EXPECT_DOUBLE_EQ(norm.apply1(-5.0), -0.5);
  EXPECT_FALSE(norm.in_range(std::vector<double>{20.0}));
  EXPECT_TRUE(norm.in_range(std::vector<double>{7.0}));
}

// MSE --------------------------------------------------------------------------

TEST(Mse, KnownValues) {
  std::vector<double> x{1.0, 2.0};
  EXPECT_DOUBLE_EQ(mse(x, x), 0.0);
  EXPECT_DOUBLE_EQ(mse(std::vector<double>{0.0}, std::vector<double>{2.0}), 4.0);
  EXPECT_DOUBLE_EQ(mse(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}),
                   2.5);
}

TEST(Mse, RejectsEmptyAndMismatched) {
  std::vector<double> empty;
  EXPECT_THROW(mse(empty, empty), std::invalid_argument);
  EXPECT_THROW(mse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
               std::invalid_argument);
}
