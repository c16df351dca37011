#pragma once

#include <string>
#include <string_view>

#include "quantcal/conformal/interval.hpp"
#include "quantcal/conformal/risk.hpp"

namespace quantcal {

/// Constant-scaling comparator: the fixed-quantile interval around the
/// median is stretched by one global factor lambda.
struct BaselineCalibration {
  double lambda_star = 0.0;
  double q_lower = 0.05;
  double q_upper = 0.95;
  double alpha = 0.0;
  double alpha_prime = 0.0;
  double achieved_risk = 0.0;
  std::size_t iterations = 0;  ///< bisection steps
  friend bool operator==(const BaselineCalibration&, const BaselineCalibration&) = default;
};

struct BaselineOptions {
  double q_lower = 0.05;
  double q_upper = 0.95;
  double lambda_max = 20.0;
  double tolerance = 1e-4;
};

class BaselineError : public Error {
 public:
  using Error::Error;
};

/// Interval [m - lambda (m - l), m + lambda (u - m)] from a repaired
/// (l, m, u) triple.
UncertaintyMap scale_interval(const UncertaintyMap& raw, double lambda);

/// Smallest lambda in [0, lambda_max] (to `tolerance`) whose calibration
/// risk is at most alpha'. Risk is nonincreasing in lambda because the
/// triple is repaired first, so bisection applies. Throws BaselineError
/// if lambda_max is not enough.
BaselineCalibration calibrate_baseline(const QuantileRegressor& model, const PairedDataset& calib_set, double alpha,
                                       const BaselineOptions& options = {});

UncertaintyMap build_baseline_interval(const QuantileRegressor& model, const Tensor& y,
                                       const BaselineCalibration& calibration);

std::string baseline_to_json(const BaselineCalibration& b, std::string_view generated_at = {});
BaselineCalibration baseline_from_json(std::string_view text);

}  // namespace quantcal
