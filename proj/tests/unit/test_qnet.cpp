#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "quantcal/qnet/checkpoint.hpp"
#include "quantcal/qnet/model.hpp"
#include "quantcal/qnet/oracles.hpp"
#include "quantcal/numerics/random.hpp"

using namespace quantcal;

namespace {

Tensor random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t({1, h, w});
  for (auto& v : t.data()) v = u(rng);
  return t;
}

ArchConfig small_arch() {
  ArchConfig a;
  a.channels = {4, 8};
  a.embedding.dim = 8;
  a.embedding.mlp_hidden = 12;
  return a;
}

}  // namespace

TEST(Embedding, RawCoordinateZeroIsSinOfBaseTimesQ) {
  const QuantileEmbeddingConfig cfg;
  const auto e = sinusoidal_encoding(0.5, cfg);
  ASSERT_EQ(e.size(), 32u);
  EXPECT_DOUBLE_EQ(e[0], std::sin(500.0));
  EXPECT_DOUBLE_EQ(e[1], std::cos(500.0));
  // last pair uses frequency 1000 * 10000^(-30/32)
  const double w = 1000.0 * std::pow(10000.0, -30.0 / 32.0);
  EXPECT_NEAR(e[30], std::sin(0.5 * w), 1e-15);
}

TEST(Embedding, DeterministicAndInjective) {
  const QuantileModel m(ArchConfig{}, 3);
  EXPECT_EQ(m.embed(0.3), m.embed(0.3));
  const auto a = m.embed(0.25), b = m.embed(0.75);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  EXPECT_GT(diff, 1e-6);
}

TEST(Embedding, RejectsLevelsOutsideUnitInterval) {
  const QuantileEmbeddingConfig cfg;
  EXPECT_THROW(sinusoidal_encoding(0.0, cfg), DomainError);
  EXPECT_THROW(sinusoidal_encoding(1.0, cfg), DomainError);
  EXPECT_THROW(sinusoidal_encoding(-0.2, cfg), DomainError);
  QuantileEmbeddingConfig odd;
  odd.dim = 7;
  EXPECT_THROW(odd.validate(), ConfigError);
}

TEST(Model, DefaultParameterCountMatchesKernelSum) {
  // count every kernel and bias by hand for channels [16,32], k=3, d=32, h=64
  const std::size_t d = 32, h = 64, k = 3;
  auto stage = [&](std::size_t in, std::size_t out) { return out * in * k * k + out + out * d + out; };
  const std::size_t embed = d * h + h + h * d + d;
  const std::size_t expected = embed + stage(1, 16) + stage(16, 32) + stage(32, 32) + stage(32 + 32, 32) +
                               stage(32 + 16, 16) + (16 + 1);
  const QuantileModel m(ArchConfig{}, 0);
  EXPECT_EQ(m.parameter_count(), expected);
  EXPECT_EQ(expected, 47873u);
}

TEST(Model, SameSeedSameParametersDifferentSeedDiffers) {
  const QuantileModel a(ArchConfig{}, 11), b(ArchConfig{}, 11), c(ArchConfig{}, 12);
  EXPECT_EQ(a.parameter_values(), b.parameter_values());
  EXPECT_NE(a.parameter_values(), c.parameter_values());
}

TEST(Model, OutputShapeMatchesInputAndIsFinite) {
  const QuantileModel m(ArchConfig{}, 5);
  const Tensor y = random_image(32, 32, 1);
  const Tensor out = m.predict(y, 0.4);
  EXPECT_EQ(out.shape(), y.shape());
  EXPECT_TRUE(out.all_finite());
  EXPECT_EQ(out, m.predict(y, 0.4));
}

TEST(Model, OnlyFinalBiasGivesConstantOutput) {
  QuantileModel m(small_arch(), 5);
  auto values = m.parameter_values();
  for (auto& v : values)
    for (auto& x : v.data()) x = 0.0;
  const double b = 0.37;
  values.back()[0] = b;  // out.conv.bias is stored last
  m.set_parameter_values(values);
  ASSERT_EQ(m.parameters().back().name, "out.conv.bias");
  const Tensor y = random_image(16, 16, 2);
  for (double q : {0.1, 0.5, 0.9}) {
    for (double v : m.predict(y, q).data()) EXPECT_EQ(v, b);
  }
}

TEST(Model, RejectsIndivisibleShapes) {
  const QuantileModel m(ArchConfig{}, 5);
  EXPECT_THROW(m.predict(random_image(30, 32, 1), 0.5), UsageError);
  EXPECT_THROW(m.predict(Tensor({2, 32, 32}), 0.5), UsageError);
  EXPECT_THROW(m.predict(random_image(32, 32, 1), 1.5), DomainError);
}

TEST(Model, InvalidArchitectureRejected) {
  ArchConfig a;
  a.channels = {};
  EXPECT_THROW(QuantileModel(a, 0), ConfigError);
  a.channels = {8, 0};
  EXPECT_THROW(QuantileModel(a, 0), ConfigError);
  a.channels = {8};
  a.kernel_size = 4;
  EXPECT_THROW(QuantileModel(a, 0), ConfigError);
}

TEST(Model, AdoptingParametersChecksLayout) {
  const QuantileModel m(small_arch(), 1);
  std::vector<NamedTensor> params(m.parameters().begin(), m.parameters().end());
  EXPECT_NO_THROW(QuantileModel(small_arch(), params));
  params.pop_back();
  EXPECT_THROW(QuantileModel(small_arch(), params), DimensionError);
}

TEST(Model, OutputVariesSmoothlyWithQOnSmallSteps) {
  const QuantileModel m(small_arch(), 9);
  const Tensor y = random_image(16, 16, 3);
  const Tensor a = m.predict(y, 0.5), b = m.predict(y, 0.5 + 1e-4);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  EXPECT_LT(worst, 0.1);
}

TEST(Oracle, PixelOracleReturnsQEverywhere) {
  const PixelQuantileOracle oracle([](double, double q) { return q; });
  for (double v : oracle.predict(random_image(8, 8, 4), 0.3).data()) EXPECT_EQ(v, 0.3);
}

TEST(Oracle, GaussianOracleIsShiftedNormalQuantile) {
  const GaussianQuantileOracle oracle(0.1);
  const Tensor y({1, 1, 1}, 0.5);
  EXPECT_NEAR(oracle.predict(y, 0.975)[0], 0.5 + 0.1 * 1.959963984540054, 1e-12);
  EXPECT_DOUBLE_EQ(oracle.predict(y, 0.5)[0], 0.5);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const QuantileModel m(small_arch(), 21);
  std::stringstream ss;
  write_checkpoint(ss, m);
  const QuantileModel back = read_checkpoint(ss);
  EXPECT_EQ(back.arch(), m.arch());
  EXPECT_EQ(back.parameter_values(), m.parameter_values());
  const Tensor y = random_image(16, 16, 5);
  EXPECT_EQ(back.predict(y, 0.2), m.predict(y, 0.2));
}

TEST(Checkpoint, StartsWithMagicAndRejectsGarbage) {
  const QuantileModel m(small_arch(), 21);
  std::stringstream ss;
  write_checkpoint(ss, m);
  EXPECT_EQ(ss.str().substr(0, 4), "QUTC");
  std::stringstream bad("QTNSxxxx");
  EXPECT_THROW(read_checkpoint(bad), IoError);
  std::string truncated = ss.str().substr(0, ss.str().size() / 2);
  std::stringstream cut(truncated);
  EXPECT_THROW(read_checkpoint(cut), IoError);
}
