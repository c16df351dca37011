#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quantcal/datasim/io.hpp"
#include "quantcal/tools/config.hpp"

namespace quantcal::tools {

/// Fixed layout below RunConfig::output_dir.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path data_dir() const { return root / "data"; }
  std::filesystem::path manifest() const { return data_dir() / "manifest.csv"; }
  std::filesystem::path model_dir() const { return root / "model"; }
  std::filesystem::path model() const { return model_dir() / "model.qutc"; }
  std::filesystem::path train_stats() const { return model_dir() / "train_stats.csv"; }
  std::filesystem::path calibration() const { return root / "calibration.json"; }
  std::filesystem::path calibration_failure() const { return root / "calibration_failed.json"; }
  std::filesystem::path baseline() const { return root / "baseline.json"; }
  std::filesystem::path eval_report() const { return root / "eval_report.json"; }
  std::filesystem::path intensity_csv() const { return root / "intensity_bins.csv"; }
  std::filesystem::path ssr_csv() const { return root / "ssr_bins.csv"; }
  std::filesystem::path pdf_dir() const { return root / "pdf"; }
};

inline RunPaths paths_for(const RunConfig& c) { return {c.output_dir}; }

/// Samples of one split in manifest order.
PairedDataset load_split(const RunConfig& config, Split split);

struct SimulateResult {
  std::vector<ManifestRow> manifest;
};
SimulateResult cmd_simulate(const RunConfig& config);

TrainStats cmd_train(const RunConfig& config);

struct CalibrateResult {
  CalibrationResult calibration;
  std::optional<BaselineCalibration> baseline;
};
/// Writes calibration.json (and baseline.json when requested). On a failed
/// search, writes calibration_failed.json with the trace and rethrows.
CalibrateResult cmd_calibrate(const RunConfig& config, bool with_baseline);

/// Uses baseline.json when it exists.
EvalReport cmd_evaluate(const RunConfig& config);

using PixelCoord = std::pair<std::size_t, std::size_t>;

struct PdfCommandResult {
  std::vector<PixelCoord> pixels;
  std::vector<std::filesystem::path> csv_files;
  /// Oracle mode only: worst relative error against the analytic density at
  /// levels in [0.2, 0.8], over all requested pixels.
  std::optional<double> oracle_max_rel_error;
};
/// Density rows for the given pixels of the first validation sample. With
/// `oracle_mode` the trained model is replaced by a Gaussian quantile oracle
/// of std `oracle_sigma` centred on the measurement.
PdfCommandResult cmd_pdf(const RunConfig& config, const std::vector<PixelCoord>& pixels, bool oracle_mode);

/// UTC time in ISO 8601, used for the generated_at report fields.
std::string utc_timestamp();

}  // namespace quantcal::tools
