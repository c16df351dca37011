#pragma once

#include <cstddef>

#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

/// Per-pixel (lower, median, upper) for one measurement.
struct UncertaintyMap {
  Tensor lower;
  Tensor median;
  Tensor upper;
  std::size_t repair_count = 0;  ///< pixels whose triple had to be reordered

  /// upper - lower, nonnegative after repair.
  Tensor length() const { return upper - lower; }
};

/// Sorts each pixel's (lower, median, upper) triple in place order.
UncertaintyMap repair_triple(Tensor lower, Tensor median, Tensor upper);

/// Queries q_lower, 0.5 and q_upper and repairs crossings.
UncertaintyMap build_interval(const QuantileRegressor& model, const Tensor& y, double q_lower, double q_upper);

}  // namespace quantcal
