#include <gtest/gtest.h>

#include <cmath>

#include "quantcal/numerics/adam.hpp"
#include "quantcal/numerics/finite_diff.hpp"
#include "quantcal/numerics/ops.hpp"
#include "quantcal/numerics/random.hpp"
#include "quantcal/numerics/stats.hpp"
#include "quantcal/training/pinball.hpp"

using namespace quantcal;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.data()) v = n(rng);
  return t;
}

// Direct sliding-window cross-correlation with zero padding.
Tensor brute_conv(const Tensor& in, const Tensor& k, std::size_t pad) {
  const std::size_t ci = in.dim(0), h = in.dim(1), w = in.dim(2);
  const std::size_t co = k.dim(0), ks = k.dim(2);
  const std::size_t ho = h + 2 * pad - ks + 1, wo = w + 2 * pad - ks + 1;
  Tensor out({co, ho, wo});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t r = 0; r < ho; ++r)
      for (std::size_t c = 0; c < wo; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ci; ++i)
          for (std::size_t a = 0; a < ks; ++a)
            for (std::size_t b = 0; b < ks; ++b) {
              const long rr = static_cast<long>(r + a) - static_cast<long>(pad);
              const long cc = static_cast<long>(c + b) - static_cast<long>(pad);
              if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) || cc >= static_cast<long>(w)) continue;
              acc += in[(i * h + rr) * w + cc] * k[((o * ci + i) * ks + a) * ks + b];
            }
        out[(o * ho + r) * wo + c] = acc;
      }
  return out;
}

// Checks tape gradients of `build` (which maps parameter vars to a scalar)
// against central differences for every input.
void expect_grad_matches(const std::vector<Tensor>& inputs,
                         const std::function<Var(Tape&, const std::vector<Var>&)>& build, double tol = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.parameter(t));
  tape.backward(build(tape, vars));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto f = [&](const Tensor& x) {
      Tape t2;
      std::vector<Var> v2;
      for (std::size_t j = 0; j < inputs.size(); ++j) v2.push_back(t2.constant(j == i ? x : inputs[j]));
      return build(t2, v2).value().item();
    };
    const Tensor numeric = finite_diff_grad(f, inputs[i]);
    EXPECT_LT(max_relative_error(tape.grad(vars[i]), numeric), tol) << "input " << i;
  }
}

}  // namespace

TEST(Tensor, ShapeAndDataMustAgree) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_DOUBLE_EQ(t.sum(), 9.0);
  EXPECT_THROW(t.item(), DimensionError);
  EXPECT_THROW(t.reshaped({4}), DimensionError);
}

TEST(Conv2d, IdentityKernelReturnsInput) {
  Tensor in({1, 3, 3}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor k({1, 1, 1, 1}, 1.0);
  EXPECT_EQ(conv2d(in, k, 0), in);
}

TEST(Conv2d, ZeroKernelGivesZeros) {
  Rng rng(1);
  const Tensor in = random_tensor({2, 5, 5}, rng);
  const Tensor out = conv2d(in, Tensor({3, 2, 3, 3}), 1);
  EXPECT_EQ(out.shape(), (Shape{3, 5, 5}));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, AveragingKernelMatchesSlidingWindow) {
  Tensor in({1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  Tensor k({1, 1, 3, 3}, 1.0 / 9.0);
  const Tensor out = conv2d(in, k, 1);
  // every 3x3 window around a 2x2 image sees all four pixels
  for (double v : out.data()) EXPECT_NEAR(v, 10.0 / 9.0, 1e-15);
  EXPECT_EQ(out, brute_conv(in, k, 1));
}

TEST(Conv2d, MatchesBruteForceOnRandomShapes) {
  Rng rng(2);
  for (std::size_t ks : {1u, 3u, 5u}) {
    const Tensor in = random_tensor({3, 6, 7}, rng);
    const Tensor k = random_tensor({4, 3, ks, ks}, rng);
    const Tensor a = conv2d(in, k, (ks - 1) / 2);
    const Tensor b = brute_conv(in, k, (ks - 1) / 2);
    ASSERT_EQ(a.shape(), b.shape());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Conv2d, IsLinear) {
  Rng rng(3);
  const Tensor u = random_tensor({2, 8, 8}, rng), v = random_tensor({2, 8, 8}, rng);
  const Tensor k = random_tensor({3, 2, 3, 3}, rng);
  const double a = 1.7, b = -0.4;
  const Tensor lhs = conv2d(a * u + b * v, k, 1);
  const Tensor rhs = a * conv2d(u, k, 1) + b * conv2d(v, k, 1);
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-10);
}

TEST(Conv2d, RejectsMismatchedChannels) {
  EXPECT_THROW(conv2d(Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), 1), DimensionError);
  EXPECT_THROW(conv2d(Tensor({2, 4}), Tensor({1, 2, 3, 3}), 1), DimensionError);
}

TEST(Tape, SumGradientIsOnes) {
  Tape tape;
  Var p = tape.parameter(Tensor({4}, std::vector<double>{1, -2, 3, 0.5}));
  tape.backward(sum(p));
  for (double g : tape.grad(p).data()) EXPECT_EQ(g, 1.0);
}

TEST(Tape, SquareGradientAtThreeIsSix) {
  Tape tape;
  Var p = tape.parameter(Tensor::scalar(3.0));
  tape.backward(sum(mul(p, p)));
  EXPECT_DOUBLE_EQ(tape.grad(p).item(), 6.0);
}

TEST(Tape, NonScalarLossIsRejected) {
  Tape tape;
  Var p = tape.parameter(Tensor({3}, 1.0));
  EXPECT_THROW(tape.backward(p), UsageError);
}

TEST(Tape, BackwardIsDeterministic) {
  Rng rng(4);
  const Tensor x = random_tensor({2, 4, 4}, rng), k = random_tensor({2, 2, 3, 3}, rng);
  auto run = [&] {
    Tape tape;
    Var kv = tape.parameter(k);
    tape.backward(sum(silu(conv2d(tape.constant(x), kv, 1))));
    return tape.grad(kv);
  };
  EXPECT_EQ(run(), run());
}

TEST(TapeGradients, ElementwiseOps) {
  Rng rng(5);
  const Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
  expect_grad_matches({a, b}, [](Tape&, const std::vector<Var>& v) { return sum(mul(add(v[0], v[1]), v[0])); });
  expect_grad_matches({a}, [](Tape&, const std::vector<Var>& v) { return sum(mul(silu(v[0]), silu(v[0]))); });
}

TEST(TapeGradients, ConvolutionAndBias) {
  Rng rng(6);
  const Tensor x = random_tensor({2, 5, 5}, rng), k = random_tensor({3, 2, 3, 3}, rng), bias = random_tensor({3}, rng);
  expect_grad_matches({x, k, bias}, [](Tape&, const std::vector<Var>& v) {
    Var y = add_channel_bias(conv2d(v[0], v[1], 1), v[2]);
    return sum(mul(y, y));
  });
}

TEST(TapeGradients, PoolUpsampleConcat) {
  Rng rng(7);
  const Tensor a = random_tensor({2, 4, 4}, rng), b = random_tensor({1, 4, 4}, rng);
  expect_grad_matches({a, b}, [](Tape&, const std::vector<Var>& v) {
    Var up = upsample2(avg_pool2(v[0]));
    Var cat = concat_channels(up, v[1]);
    return sum(mul(cat, silu(cat)));
  });
}

TEST(TapeGradients, Linear) {
  Rng rng(8);
  const Tensor w = random_tensor({3, 5}, rng), x = random_tensor({5}, rng), bias = random_tensor({3}, rng);
  expect_grad_matches({w, x, bias}, [](Tape&, const std::vector<Var>& v) {
    Var y = silu(linear(v[0], v[1], v[2]));
    return sum(mul(y, y));
  });
}

TEST(TapeGradients, ShapeChecks) {
  Tape tape;
  EXPECT_THROW(add(tape.constant(Tensor({2})), tape.constant(Tensor({3}))), DimensionError);
  EXPECT_THROW(avg_pool2(tape.constant(Tensor({1, 3, 4}))), DimensionError);
  EXPECT_THROW(concat_channels(tape.constant(Tensor({1, 4, 4})), tape.constant(Tensor({1, 2, 2}))), DimensionError);
  EXPECT_THROW(linear(tape.constant(Tensor({3, 4})), tape.constant(Tensor({5})), tape.constant(Tensor({3}))),
               DimensionError);
}

TEST(FiniteDiff, SquareAtThree) {
  const Tensor g = finite_diff_grad([](const Tensor& x) { return x[0] * x[0]; }, Tensor::scalar(3.0));
  EXPECT_NEAR(g[0], 6.0, 1e-6);
}

TEST(FiniteDiff, ConstantFunctionHasZeroGradient) {
  const Tensor g = finite_diff_grad([](const Tensor&) { return 4.2; }, Tensor({5}, 1.0));
  for (double v : g.data()) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, PinballAwayFromKinkMatchesSubgradient) {
  // d/dxhat of the pixel-mean pinball loss is -q/N above the target branch and (1-q)/N below
  const Tensor target({1, 1, 2}, std::vector<double>{0.8, 0.1});
  const Tensor pred({1, 1, 2}, std::vector<double>{0.3, 0.6});
  const double q = 0.7;
  const Tensor g = finite_diff_grad([&](const Tensor& p) { return pinball_loss(target, p, q); }, pred);
  EXPECT_NEAR(g[0], -q / 2.0, 1e-4);
  EXPECT_NEAR(g[1], (1.0 - q) / 2.0, 1e-4);
}

TEST(FiniteDiff, RelativeErrorUsesFloor) {
  EXPECT_DOUBLE_EQ(max_relative_error(Tensor({1}, 1e-9), Tensor({1}, 0.0)), 1e-3);
  EXPECT_DOUBLE_EQ(max_relative_error(Tensor({1}, 2.0), Tensor({1}, 1.0)), 0.5);
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  std::vector<Tensor> params{Tensor({3}, std::vector<double>{1, -2, 3})};
  const auto before = params;
  std::vector<Tensor> grads{Tensor({3})};
  AdamState state({}, params);
  for (int i = 0; i < 5; ++i) adam_update(params, grads, state);
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.t, 5u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> params{Tensor::scalar(0.0)};
  std::vector<Tensor> grads{Tensor::scalar(1.0)};
  AdamState state(AdamOptions{.lr = 0.1}, params);
  adam_update(params, grads, state);
  EXPECT_NEAR(params[0].item(), -0.1 * 1.0 / (1.0 + 1e-8), 1e-12);
}

TEST(Adam, QuadraticDescentMatchesScalarSimulation) {
  // independent scalar re-derivation of the update rule
  double p_ref = 1.0, m = 0.0, v = 0.0;
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<Tensor> params{Tensor::scalar(1.0)};
  AdamState state(AdamOptions{.lr = lr}, params);
  double prev = 1.0;
  for (int t = 1; t <= 10; ++t) {
    const double g = 2.0 * p_ref;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    p_ref -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);

    std::vector<Tensor> grads{Tensor::scalar(2.0 * params[0].item())};
    adam_update(params, grads, state);
    EXPECT_NEAR(params[0].item(), p_ref, 1e-14);
    EXPECT_LT(std::abs(params[0].item()), prev);
    prev = std::abs(params[0].item());
  }
}

TEST(Adam, RejectsBadStateAndShapes) {
  std::vector<Tensor> params{Tensor({2})};
  EXPECT_THROW(AdamState(AdamOptions{.beta1 = 1.0}, params), DomainError);
  AdamState state({}, params);
  std::vector<Tensor> grads{Tensor({3})};
  EXPECT_THROW(adam_update(params, grads, state), DimensionError);
}

TEST(Stats, NormalQuantileKnownValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_cdf(normal_quantile(0.2)), 0.2, 1e-14);
  EXPECT_THROW(normal_quantile(0.0), DomainError);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
}

TEST(Stats, PopulationMomentsAndPercentiles) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean_of(v), 2.5);
  EXPECT_DOUBLE_EQ(stddev_of(v), std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(percentile_of(v, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile_of(v, 100), 4.0);
}

TEST(Random, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(7, "noise"), derive_seed(7, "noise"));
  EXPECT_NE(derive_seed(7, "noise"), derive_seed(7, "phantom"));
  EXPECT_NE(derive_seed(7, std::uint64_t{1}), derive_seed(8, std::uint64_t{1}));
}
