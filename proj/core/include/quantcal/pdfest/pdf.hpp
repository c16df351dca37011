#pragma once

#include <span>
#include <vector>

#include "quantcal/conformal/calibrate.hpp"
#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

/// Predictions of one measurement over an ascending grid of levels.
struct QuantileSweep {
  std::vector<double> q_grid;
  Tensor values;  ///< [len(q_grid), H, W]
  bool monotonized = false;
  std::size_t repair_count = 0;

  std::size_t height() const { return values.dim(1); }
  std::size_t width() const { return values.dim(2); }
  /// The quantile curve of one pixel, in grid order.
  std::vector<double> pixel(std::size_t row, std::size_t col) const;
};

/// `count` evenly spaced levels from `lo` to `hi` inclusive.
std::vector<double> linspace_grid(double lo, double hi, std::size_t count);
/// 33 levels from 0.02 to 0.98.
std::vector<double> default_q_grid();

/// Throws DomainError unless the grid is strictly ascending inside (0,1)
/// with at least 3 levels.
void validate_q_grid(std::span<const double> q_grid);

QuantileSweep quantile_sweep(const QuantileRegressor& model, const Tensor& y, std::span<const double> q_grid);

/// Sorts every pixel's curve along the grid axis. repair_count is the number
/// of pixels whose order changed.
QuantileSweep monotonize(QuantileSweep sweep);

/// Density samples of one pixel at the interior grid points.
struct PixelPdf {
  std::vector<double> levels;     ///< q_i for i = 1..n-2
  std::vector<double> values;     ///< Q(q_i)
  std::vector<double> densities;  ///< 1 / max(dQ/dq, floor)
};

/// Central differences dQ/dq at interior points of one quantile curve.
PixelPdf pixel_pdf_from_quantiles(std::span<const double> levels, std::span<const double> values,
                                  double slope_floor = 1e-6);

struct PdfEstimate {
  std::vector<double> q_grid;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<PixelPdf> pixels;  ///< row-major

  const PixelPdf& at(std::size_t row, std::size_t col) const { return pixels.at(row * width + col); }
};

PdfEstimate pdf_from_quantiles(const QuantileSweep& sweep, double slope_floor = 1e-6);

/// Trapezoidal integral of the density samples over [v_lo, v_hi], linearly
/// interpolating the density at the interval ends.
double density_mass(const PixelPdf& pdf, double v_lo, double v_hi);

/// One alpha of a multi-level calibration, after nesting repair.
struct CalibratedLevel {
  double alpha = 0.0;
  double q_lower = 0.0;
  double q_upper = 0.0;
  double mass_lower = 0.0;  ///< achieved lower-side risk, used as CDF level of the lower bound
  double mass_upper = 0.0;  ///< achieved upper-side risk; the upper bound sits at CDF 1 - mass_upper
  bool repaired = false;    ///< nesting repair changed this entry
};

struct ConformalizedPdf {
  std::vector<CalibratedLevel> levels;
  std::vector<double> cdf_levels;  ///< ascending CDF levels of the assembled curve
  std::vector<double> query_levels;  ///< model levels queried for each CDF level
  QuantileSweep sweep;             ///< values over query_levels, monotonized
  PdfEstimate pdf;                 ///< densities indexed by cdf_levels
};

/// Any alpha whose calibration failed.
class PartialResultError : public Error {
 public:
  PartialResultError(const std::string& what, std::vector<double> failed, std::vector<CalibratedLevel> succeeded)
      : Error(what), failed_(std::move(failed)), succeeded_(std::move(succeeded)) {}
  const std::vector<double>& failed_alphas() const noexcept { return failed_; }
  const std::vector<CalibratedLevel>& succeeded() const noexcept { return succeeded_; }

 private:
  std::vector<double> failed_;
  std::vector<CalibratedLevel> succeeded_;
};

/// Enforces nesting over levels sorted by ascending alpha: lower bounds and
/// both tail masses are made nondecreasing, upper bounds nonincreasing.
std::vector<CalibratedLevel> repair_nesting(std::vector<CalibratedLevel> levels);

/// Calibrates every alpha, repairs nesting (smaller alpha must give a wider
/// pair), then treats the calibrated bounds plus the median as samples of
/// the CDF and differentiates the resulting quantile curve.
std::vector<CalibratedLevel> calibrate_levels(const QuantileRegressor& model, const PairedDataset& calib_set,
                                              std::span<const double> alpha_list,
                                              const CalibrationOptions& options = {});

ConformalizedPdf conformalized_pdf(const QuantileRegressor& model, const PairedDataset& calib_set, const Tensor& y,
                                   std::span<const double> alpha_list, const CalibrationOptions& options = {});

/// Same, reusing levels from calibrate_levels().
ConformalizedPdf conformalized_pdf(const QuantileRegressor& model, const Tensor& y,
                                   std::vector<CalibratedLevel> levels);

}  // namespace quantcal
