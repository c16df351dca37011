#pragma once

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

/// Anything that maps (measurement, quantile level) to a predicted image.
///
/// The trained network implements this, and so do the analytic oracles used
/// to test calibration and density estimation independently of training.
/// predict() must be const and safe to call concurrently.
class QuantileRegressor {
 public:
  virtual ~QuantileRegressor() = default;

  /// y is [1,H,W]; the result has the same shape.
  virtual Tensor predict(const Tensor& y, double q) const = 0;
};

/// Throws DomainError unless 0 < q < 1.
void require_quantile_level(double q, const char* what);

}  // namespace quantcal
