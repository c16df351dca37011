#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "quantcal/conformal/baseline.hpp"
#include "quantcal/conformal/calibrate.hpp"
#include "quantcal/datasim/simulate.hpp"
#include "quantcal/datasim/split.hpp"
#include "quantcal/metrics/report.hpp"
#include "quantcal/qnet/model.hpp"
#include "quantcal/training/trainer.hpp"

namespace quantcal::tools {

/// Everything one pipeline run needs. Loaded from a flat `key = value` file;
/// see README for the key list. Per-stage seeds all derive from `seed`.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";

  SimulationConfig simulation;
  std::size_t n_samples = 240;
  SplitSpec split;

  ArchConfig arch;
  TrainConfig train;

  double alpha = 0.1;
  CalibrationOptions calibration;
  BaselineOptions baseline;

  double grid_min = 0.02;
  double grid_max = 0.98;
  std::size_t grid_count = 33;
  std::vector<double> alpha_list;
  double oracle_sigma = 0.1;

  EvalOptions eval;

  std::vector<double> q_grid() const { return linspace_grid(grid_min, grid_max, grid_count); }

  /// Reseeds every stage from `s`.
  void set_seed(std::uint64_t s);
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// The parsed config written back in canonical `key = value` form.
std::string format_config(const RunConfig& config);

}  // namespace quantcal::tools
