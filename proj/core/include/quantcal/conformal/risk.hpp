#pragma once

#include <cstddef>
#include <span>

#include "quantcal/datasim/sample.hpp"
#include "quantcal/errors.hpp"
#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

/// Raised when the finite-sample correction leaves no error budget.
class CalibrationSetTooSmallError : public Error {
 public:
  using Error::Error;
};

/// Miscovered-pixel fraction averaged over images; a pixel is miscovered
/// when gt < lower or gt > upper.
double empirical_risk(std::span<const Tensor> lower, std::span<const Tensor> upper, std::span<const Tensor> gt);

struct OneSidedRisks {
  double lower = 0.0;  ///< mean fraction with gt < lower bound
  double upper = 0.0;  ///< mean fraction with gt > upper bound
  double total() const { return lower + upper; }
};

OneSidedRisks one_sided_risks(std::span<const Tensor> lower, std::span<const Tensor> upper,
                              std::span<const Tensor> gt);

/// One-sided risks of the repaired interval [f(y, q_lower), f(y, q_upper)]
/// (see build_interval) over a calibration set.
OneSidedRisks one_sided_risks(const QuantileRegressor& model, const PairedDataset& calib_set, double q_lower,
                              double q_upper);

/// alpha - (1 - alpha) / n_calib. Throws CalibrationSetTooSmallError when
/// the result is not positive and DomainError for alpha outside (0,1).
double adjust_alpha(double alpha, std::size_t n_calib);

}  // namespace quantcal
