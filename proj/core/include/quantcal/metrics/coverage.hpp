#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "quantcal/conformal/calibrate.hpp"
#include "quantcal/conformal/interval.hpp"
#include "quantcal/pdfest/pdf.hpp"

namespace quantcal {

/// Mean and population standard deviation.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct RiskLengthStats {
  MeanStd risk;    ///< over images
  MeanStd length;  ///< over all pixels of all images
  std::vector<double> per_image_risk;
};

/// Statistics for intervals already built; one map per gt image.
RiskLengthStats risk_and_length(std::span<const UncertaintyMap> maps, std::span<const Tensor> gt);

RiskLengthStats test_risk_and_length(const QuantileRegressor& model, const CalibrationResult& calibration,
                                     const PairedDataset& test_set);

struct IntensityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t pixel_count = 0;
  std::optional<double> mean_length;  ///< absent when no pixel falls in the bin
  std::optional<double> ci_low;       ///< 2.5th percentile of the bootstrap means
  std::optional<double> ci_high;      ///< 97.5th percentile
};

struct BootstrapOptions {
  std::size_t resamples = 1000;
  std::uint64_t seed = 0;
};

/// Equal-width bins of ground-truth intensity on [0,1]; values outside are
/// clamped into the end bins. Confidence intervals resample whole images.
std::vector<IntensityBin> intensity_stratified_lengths(std::span<const Tensor> gt_maps,
                                                       std::span<const Tensor> length_maps, std::size_t n_bins = 10,
                                                       const BootstrapOptions& boot = {});

struct SizeBin {
  double length_lo = 0.0;  ///< smallest length in the bin
  double length_hi = 0.0;  ///< largest length in the bin
  std::size_t pixel_count = 0;
  std::size_t miscovered = 0;
  double risk = 0.0;
};

struct SizeStratifiedRisk {
  std::vector<SizeBin> bins;
  double pooled_risk = 0.0;         ///< miscovered pixels / all pixels
  double weighted_bin_risk = 0.0;   ///< sum(count * risk) / sum(count)
};

/// Equal-count bins over pixels ranked by interval length (ties by pixel
/// order). The first N mod n_bins bins get one extra pixel.
SizeStratifiedRisk size_stratified_risk(std::span<const Tensor> length_maps, std::span<const Tensor> lower,
                                        std::span<const Tensor> upper, std::span<const Tensor> gt,
                                        std::size_t n_bins = 5);

struct CrossingAudit {
  std::size_t crossed_pixels = 0;
  std::size_t total_pixels = 0;
  double fraction = 0.0;
};

inline constexpr double kCrossingTolerance = 1e-9;

/// [0.1, 0.2, ..., 0.9, 0.99]
std::vector<double> default_crossing_grid();

/// Pixels where the sweep decreases by more than kCrossingTolerance between
/// any adjacent pair of levels.
CrossingAudit crossing_audit(std::span<const QuantileSweep> sweeps);
CrossingAudit crossing_audit(const QuantileRegressor& model, const PairedDataset& test_set,
                             std::span<const double> q_list);

}  // namespace quantcal
