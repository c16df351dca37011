#pragma once

#include <functional>

#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

/// Applies a per-pixel quantile function value = f(y_pixel, q).
class PixelQuantileOracle : public QuantileRegressor {
 public:
  using Fn = std::function<double(double y, double q)>;
  explicit PixelQuantileOracle(Fn fn) : fn_(std::move(fn)) {}
  Tensor predict(const Tensor& y, double q) const override;

 private:
  Fn fn_;
};

/// Conditional Gaussian with mean y and standard deviation sigma(y):
/// predict(y, q) = y + sigma(y) * Phi^-1(q).
class GaussianQuantileOracle : public QuantileRegressor {
 public:
  using SigmaFn = std::function<double(double y)>;
  explicit GaussianQuantileOracle(double sigma);
  explicit GaussianQuantileOracle(SigmaFn sigma) : sigma_(std::move(sigma)) {}
  Tensor predict(const Tensor& y, double q) const override;
  double sigma_at(double y) const { return sigma_(y); }

 private:
  SigmaFn sigma_;
};

}  // namespace quantcal
