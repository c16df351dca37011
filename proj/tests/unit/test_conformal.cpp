#include <gtest/gtest.h>

#include <cmath>

#include "quantcal/conformal/baseline.hpp"
#include "quantcal/conformal/calibrate.hpp"
#include "quantcal/conformal/interval.hpp"
#include "quantcal/numerics/random.hpp"
#include "quantcal/qnet/oracles.hpp"

using namespace quantcal;

namespace {

// Pairs where x | y ~ N(y, sigma^2) exactly, so GaussianQuantileOracle(sigma)
// is the true conditional quantile function.
PairedDataset oracle_pairs(std::size_t n, std::size_t size, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  std::normal_distribution<double> z;
  PairedDataset out;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor y({1, size, size}), x({1, size, size});
    for (std::size_t k = 0; k < y.size(); ++k) {
      y[k] = u(rng);
      x[k] = y[k] + sigma * z(rng);
    }
    out.push_back({x, y, "gaussian", sigma});
  }
  return out;
}

Tensor image(std::vector<double> v, std::size_t h, std::size_t w) { return Tensor({1, h, w}, std::move(v)); }

// Oracle returning `lo` below the median level, `hi` above it, and their
// midpoint at q = 0.5.
PixelQuantileOracle step_oracle(double lo, double hi) {
  return PixelQuantileOracle([lo, hi](double, double q) { return q < 0.5 ? lo : (q > 0.5 ? hi : 0.5 * (lo + hi)); });
}

}  // namespace

TEST(EmpiricalRisk, FullCoverageIsZero) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor gt({1, 4, 4});
  for (auto& v : gt.data()) v = u(rng);
  const std::vector<Tensor> lo{Tensor({1, 4, 4}, 0.0)}, hi{Tensor({1, 4, 4}, 1.0)}, g{gt};
  EXPECT_EQ(empirical_risk(lo, hi, g), 0.0);
}

TEST(EmpiricalRisk, DegenerateIntervalMissesEverything) {
  const std::vector<Tensor> b{image({0.5}, 1, 1)}, g{image({0.7}, 1, 1)};
  EXPECT_EQ(empirical_risk(b, b, g), 1.0);
}

TEST(EmpiricalRisk, TwoByTwoBruteForce) {
  const std::vector<Tensor> lo{Tensor({1, 2, 2}, 0.2)}, hi{Tensor({1, 2, 2}, 0.8)};
  const std::vector<Tensor> g{image({0.1, 0.5, 0.9, 0.3}, 2, 2)};
  EXPECT_DOUBLE_EQ(empirical_risk(lo, hi, g), 0.5);
  const std::vector<Tensor> wrong{Tensor({1, 3, 3})};
  EXPECT_THROW(empirical_risk(lo, hi, wrong), DimensionError);
}

TEST(EmpiricalRisk, WideningNeverIncreasesRisk) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor gt({1, 5, 5}), lo({1, 5, 5}), hi({1, 5, 5});
    for (std::size_t k = 0; k < gt.size(); ++k) {
      gt[k] = u(rng);
      lo[k] = u(rng) * 0.5;
      hi[k] = 0.5 + u(rng) * 0.5;
    }
    Tensor lo2 = lo, hi2 = hi;
    for (std::size_t k = 0; k < gt.size(); ++k) {
      lo2[k] -= 0.2 * u(rng);
      hi2[k] += 0.2 * u(rng);
    }
    const std::vector<Tensor> g{gt}, a{lo}, b{hi}, a2{lo2}, b2{hi2};
    EXPECT_LE(empirical_risk(a2, b2, g), empirical_risk(a, b, g));
  }
}

TEST(OneSidedRisks, OracleExamples) {
  PairedDataset set{{image({0.3, 0.5, 0.7}, 1, 3), Tensor({1, 1, 3}, 0.5), "gaussian", 0.0}};
  const auto wide = one_sided_risks(step_oracle(0.0, 1.0), set, 0.1, 0.9);
  EXPECT_EQ(wide.lower, 0.0);
  EXPECT_EQ(wide.upper, 0.0);
  const auto high = one_sided_risks(step_oracle(1.0, 1.0), set, 0.1, 0.9);
  EXPECT_EQ(high.lower, 1.0);
  const auto mid = one_sided_risks(step_oracle(0.4, 0.6), set, 0.1, 0.9);
  EXPECT_DOUBLE_EQ(mid.lower, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(mid.upper, 1.0 / 3.0);
}

TEST(OneSidedRisks, DecompositionMatchesBruteForce) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 4, h = 1 + rng() % 5, w = 1 + rng() % 5;
    std::vector<Tensor> lo, hi, gt;
    std::size_t brute_lower = 0, brute_upper = 0;
    double brute_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Tensor l({1, h, w}), up({1, h, w}), g({1, h, w});
      std::size_t missed = 0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        l[k] = u(rng) * 0.6;
        up[k] = l[k] + u(rng) * 0.6;
        g[k] = u(rng);
        missed += (g[k] < l[k]) || (g[k] > up[k]);
      }
      brute_total += static_cast<double>(missed) / static_cast<double>(g.size());
      lo.push_back(l);
      hi.push_back(up);
      gt.push_back(g);
      (void)brute_lower;
      (void)brute_upper;
    }
    brute_total /= static_cast<double>(n);
    const auto r = one_sided_risks(lo, hi, gt);
    EXPECT_LT(std::abs(r.total() - empirical_risk(lo, hi, gt)), 1e-12);
    EXPECT_LT(std::abs(r.total() - brute_total), 1e-12);
  }
}

TEST(AdjustAlpha, Substitution) {
  EXPECT_NEAR(adjust_alpha(0.1, 100), 0.091, 1e-15);
  EXPECT_NEAR(adjust_alpha(0.1, 1000000), 0.0999991, 1e-15);
  EXPECT_THROW(adjust_alpha(0.1, 9), CalibrationSetTooSmallError);
  EXPECT_THROW(adjust_alpha(1.2, 100), DomainError);
}

TEST(BuildInterval, QOracleGivesLevelsAsBounds) {
  const PixelQuantileOracle oracle([](double, double q) { return q; });
  const auto m = build_interval(oracle, Tensor({1, 4, 4}, 0.3), 0.2, 0.7);
  for (std::size_t k = 0; k < 16; ++k) {
    EXPECT_EQ(m.lower[k], 0.2);
    EXPECT_EQ(m.median[k], 0.5);
    EXPECT_EQ(m.upper[k], 0.7);
    EXPECT_NEAR(m.length()[k], 0.5, 1e-15);
  }
  EXPECT_EQ(m.repair_count, 0u);
}

TEST(BuildInterval, RepairSortsCrossedTriples) {
  const PixelQuantileOracle decreasing([](double y, double q) { return y - q; });
  const auto m = build_interval(decreasing, Tensor({1, 3, 3}, 0.9), 0.1, 0.8);
  EXPECT_EQ(m.repair_count, 9u);
  for (std::size_t k = 0; k < 9; ++k) {
    EXPECT_LE(m.lower[k], m.median[k]);
    EXPECT_LE(m.median[k], m.upper[k]);
    EXPECT_GE(m.length()[k], 0.0);
  }
}

TEST(Calibrate, GaussianOracleMeetsRiskTarget) {
  const auto set = oracle_pairs(100, 16, 0.1, 4);
  const GaussianQuantileOracle oracle(0.1);
  const auto r = calibrate(oracle, set, 0.1);
  EXPECT_NEAR(r.alpha_prime, 0.091, 1e-12);
  EXPECT_LE(r.achieved_risk, r.alpha_prime);
  const double pixel = 1.0 / (100.0 * 256.0);
  EXPECT_LE(r.achieved_risk_lower, r.alpha_prime / 2 + pixel);
  EXPECT_LE(r.achieved_risk_upper, r.alpha_prime / 2 + pixel);
  EXPECT_EQ(r.trace.size(), r.iterations);
  EXPECT_LT(r.q_lower_star, r.q_upper_star);
  // the true conditional quantiles put about alpha'/2 in each tail
  EXPECT_NEAR(r.q_lower_star, 0.0455, 0.01);
  EXPECT_NEAR(r.q_upper_star, 1 - 0.0455, 0.01);
}

TEST(Calibrate, LargerAlphaGivesNarrowerLevels) {
  const auto set = oracle_pairs(100, 16, 0.1, 5);
  const GaussianQuantileOracle oracle(0.1);
  const auto a = calibrate(oracle, set, 0.1), b = calibrate(oracle, set, 0.5);
  EXPECT_LT(b.q_upper_star - b.q_lower_star, a.q_upper_star - a.q_lower_star);
}

TEST(Calibrate, AlphaAboveOneHalfStartsFromBudgetPoint) {
  const auto set = oracle_pairs(100, 16, 0.1, 13);
  const GaussianQuantileOracle oracle(0.1);
  const auto r = calibrate(oracle, set, 0.8);
  EXPECT_LT(r.q_lower_star, r.q_upper_star);
  EXPECT_LE(r.achieved_risk, r.alpha_prime);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_NEAR(r.trace.front().q_lower, r.alpha_prime / 2, 1e-15);
}

TEST(Calibrate, ZeroWidthModelFails) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PairedDataset set;
  for (int i = 0; i < 20; ++i) {
    Tensor x({1, 4, 4});
    for (auto& v : x.data()) v = u(rng);
    set.push_back({x, Tensor({1, 4, 4}, 0.5), "gaussian", 0.0});
  }
  const PixelQuantileOracle constant([](double, double) { return 0.5; });
  CalibrationOptions opts;
  opts.max_iters = 200;
  try {
    calibrate(constant, set, 0.1, opts);
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    EXPECT_EQ(e.trace().size(), 200u);
  }
}

TEST(Calibrate, PreconditionErrors) {
  const GaussianQuantileOracle oracle(0.1);
  EXPECT_THROW(calibrate(oracle, {}, 0.1), UsageError);
  const auto set = oracle_pairs(5, 4, 0.1, 7);
  EXPECT_THROW(calibrate(oracle, set, 0.1), CalibrationSetTooSmallError);
  CalibrationOptions opts;
  opts.delta_q = 0.0;
  EXPECT_THROW(calibrate(oracle, oracle_pairs(20, 4, 0.1, 7), 0.3, opts), DomainError);
}

TEST(Calibrate, JsonRoundTrip) {
  const auto set = oracle_pairs(50, 8, 0.1, 8);
  const auto r = calibrate(GaussianQuantileOracle(0.1), set, 0.2);
  const std::string text = calibration_to_json(r, "2026-01-01T00:00:00Z");
  EXPECT_NE(text.find("\"schema_version\""), std::string::npos);
  EXPECT_NE(text.find("\"generated_at\""), std::string::npos);
  EXPECT_EQ(calibration_from_json(text), r);
  EXPECT_EQ(calibration_to_json(r), calibration_to_json(calibration_from_json(text)));
}

TEST(Baseline, ZeroScaleDegeneratesToMedian) {
  const auto set = oracle_pairs(30, 8, 0.1, 9);
  const GaussianQuantileOracle oracle(0.1);
  const auto raw = build_interval(oracle, set[0].y, 0.05, 0.95);
  const auto zero = scale_interval(raw, 0.0);
  EXPECT_EQ(zero.lower, raw.median);
  EXPECT_EQ(zero.upper, raw.median);
  const std::vector<Tensor> lo{zero.lower}, hi{zero.upper}, gt{set[0].x};
  EXPECT_EQ(empirical_risk(lo, hi, gt), 1.0);
  const auto one = scale_interval(raw, 1.0);
  for (std::size_t k = 0; k < raw.lower.size(); ++k) {
    EXPECT_NEAR(one.lower[k], raw.lower[k], 1e-15);
    EXPECT_NEAR(one.upper[k], raw.upper[k], 1e-15);
  }
}

TEST(Baseline, CalibratedGaussianNeedsNoRescaling) {
  const auto set = oracle_pairs(100, 16, 0.1, 10);
  const auto b = calibrate_baseline(GaussianQuantileOracle(0.1), set, 0.1);
  EXPECT_GE(b.lambda_star, 0.95);
  EXPECT_LE(b.lambda_star, 1.05);
  EXPECT_LE(b.achieved_risk, b.alpha_prime);
  EXPECT_EQ(baseline_from_json(baseline_to_json(b)), b);
}

TEST(Baseline, RiskNonincreasingInLambda) {
  const auto set = oracle_pairs(20, 8, 0.1, 11);
  const GaussianQuantileOracle oracle(0.1);
  std::vector<UncertaintyMap> raw;
  std::vector<Tensor> gt;
  for (const auto& s : set) {
    raw.push_back(build_interval(oracle, s.y, 0.05, 0.95));
    gt.push_back(s.x);
  }
  double prev = 2.0;
  for (double lambda = 0.0; lambda <= 3.0; lambda += 0.05) {
    std::vector<Tensor> lo, hi;
    for (const auto& m : raw) {
      const auto s = scale_interval(m, lambda);
      lo.push_back(s.lower);
      hi.push_back(s.upper);
    }
    const double r = empirical_risk(lo, hi, gt);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Baseline, FailsWhenScaleCapIsTooSmall) {
  const auto set = oracle_pairs(30, 8, 0.1, 12);
  BaselineOptions opts;
  opts.lambda_max = 0.2;
  EXPECT_THROW(calibrate_baseline(GaussianQuantileOracle(0.1), set, 0.1, opts), BaselineError);
}
