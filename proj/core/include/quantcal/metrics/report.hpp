#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantcal/conformal/baseline.hpp"
#include "quantcal/metrics/coverage.hpp"
#include "quantcal/metrics/quality.hpp"

namespace quantcal {

struct MethodSummary {
  MeanStd risk;
  MeanStd length;
};

struct EvalOptions {
  std::size_t intensity_bins = 10;
  std::size_t size_bins = 5;
  std::vector<double> crossing_grid = default_crossing_grid();
  BootstrapOptions bootstrap;
};

struct EvalReport {
  double alpha = 0.0;
  double q_lower_star = 0.0;
  double q_upper_star = 0.0;
  std::size_t n_images = 0;
  MeanStd total_risk;
  MeanStd interval_length;
  std::vector<IntensityBin> intensity_bins;
  SizeStratifiedRisk size_stratified;
  CrossingAudit crossing;
  /// Averages of per-image median-prediction quality; psnr is taken from the
  /// mean mse so that psnr = 10 log10(1/mse) holds for the report.
  ImageQuality quality;
  std::optional<MethodSummary> baseline;
  std::optional<double> baseline_lambda;
};

EvalReport evaluate(const QuantileRegressor& model, const CalibrationResult& calibration, const PairedDataset& test_set,
                    const BaselineCalibration* baseline = nullptr, const EvalOptions& options = {});

std::string eval_report_to_json(const EvalReport& report, std::string_view generated_at = {});
std::string intensity_bins_csv(const std::vector<IntensityBin>& bins);
std::string size_bins_csv(const SizeStratifiedRisk& ssr);

}  // namespace quantcal
