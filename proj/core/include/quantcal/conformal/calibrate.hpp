#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "quantcal/conformal/risk.hpp"

namespace quantcal {

struct CalibrationTraceEntry {
  double q_lower = 0.0;
  double q_upper = 0.0;
  double r_lower = 0.0;
  double r_upper = 0.0;
  friend bool operator==(const CalibrationTraceEntry&, const CalibrationTraceEntry&) = default;
};

struct CalibrationResult {
  double q_lower_star = 0.0;
  double q_upper_star = 0.0;
  double alpha = 0.0;
  double alpha_prime = 0.0;
  double achieved_risk = 0.0;
  double achieved_risk_lower = 0.0;
  double achieved_risk_upper = 0.0;
  std::size_t iterations = 0;
  std::vector<CalibrationTraceEntry> trace;
  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

struct CalibrationOptions {
  double delta_q = 0.002;   ///< initial step on the quantile axis
  std::size_t max_iters = 1000;
  double q_floor = 0.001;
  double q_ceil = 0.999;
  double min_step = 1e-4;   ///< a bound's step is resolved once it halves below this
};

/// Max iterations reached without meeting the risk target.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, std::vector<CalibrationTraceEntry> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<CalibrationTraceEntry>& trace() const noexcept { return trace_; }

 private:
  std::vector<CalibrationTraceEntry> trace_;
};

/// A move left q_lower >= q_upper.
class BoundsCollapseError : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

/// Searches (q_lower, q_upper) so that the calibration-set risk is at most
/// alpha' = alpha - (1-alpha)/n, giving each side a budget of alpha'/2.
///
/// Starts at (alpha', 1-alpha'), or at (alpha'/2, 1-alpha'/2) when
/// alpha' >= 0.5. Each iteration evaluates both one-sided risks; a bound
/// within its budget tightens by its step, otherwise it relaxes. A bound's
/// step halves whenever it reverses direction. Once a
/// bound's step is below `min_step`, a bound within budget holds instead of
/// tightening. The search stops when the total risk is at most alpha' and
/// either both one-sided risks sit within one pixel of alpha'/2 from below,
/// or both steps are resolved and neither side exceeds alpha'/2 by more
/// than one pixel. Bounds are clamped to [q_floor, q_ceil].
CalibrationResult calibrate(const QuantileRegressor& model, const PairedDataset& calib_set, double alpha,
                            const CalibrationOptions& options = {});

std::string calibration_to_json(const CalibrationResult& result, std::string_view generated_at = {});
CalibrationResult calibration_from_json(std::string_view text);

}  // namespace quantcal
