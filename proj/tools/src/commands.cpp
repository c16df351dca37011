#include "quantcal/tools/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quantcal/numerics/random.hpp"
#include "quantcal/numerics/stats.hpp"
#include "quantcal/pdfest/pdf.hpp"
#include "quantcal/qnet/checkpoint.hpp"
#include "quantcal/qnet/oracles.hpp"

namespace fs = std::filesystem;

namespace quantcal::tools {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QuantileModel load_model(const RunConfig& config) {
  const auto path = paths_for(config).model();
  if (!fs::exists(path)) throw UsageError("no checkpoint at " + path.string() + "; run train first");
  return load_checkpoint(path);
}

std::string sample_file(const char* prefix, std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.qtns", prefix, id);
  return buf;
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

PairedDataset load_split(const RunConfig& config, Split split) {
  const auto paths = paths_for(config);
  if (!fs::exists(paths.manifest())) throw UsageError("no dataset at " + paths.data_dir().string() + "; run simulate first");
  PairedDataset out;
  for (const auto& row : read_manifest(paths.manifest())) {
    if (row.split != split) continue;
    out.push_back({load_tensor(paths.data_dir() / row.x_path), load_tensor(paths.data_dir() / row.y_path),
                   row.forward_model, row.param});
  }
  return out;
}

SimulateResult cmd_simulate(const RunConfig& config) {
  config.validate();
  const auto paths = paths_for(config);
  fs::create_directories(paths.data_dir());
  const auto data = simulate_dataset(config.simulation, config.n_samples);
  const auto split = split_dataset(config.n_samples, config.split);

  std::vector<Split> assignment(config.n_samples, Split::train);
  for (auto i : split.calibration) assignment[i] = Split::calibration;
  for (auto i : split.validation) assignment[i] = Split::validation;

  SimulateResult result;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ManifestRow row{i, sample_file("x", i), sample_file("y", i), data[i].forward_model, data[i].param, assignment[i]};
    save_tensor(paths.data_dir() / row.x_path, data[i].x);
    save_tensor(paths.data_dir() / row.y_path, data[i].y);
    result.manifest.push_back(std::move(row));
  }
  write_manifest(paths.manifest(), result.manifest);
  write_text(paths.root / "config.resolved", format_config(config));
  return result;
}

TrainStats cmd_train(const RunConfig& config) {
  config.validate();
  const auto paths = paths_for(config);
  const auto train_set = load_split(config, Split::train);
  const auto val_set = load_split(config, Split::validation);
  QuantileModel model(config.arch, derive_seed(config.seed, "model"));
  fs::create_directories(paths.model_dir());
  const auto stats = train(model, train_set, val_set, config.train, [&](std::size_t epoch, const QuantileModel& m) {
    char name[48];
    std::snprintf(name, sizeof name, "checkpoint_epoch%04zu.qutc", epoch);
    save_checkpoint(paths.model_dir() / name, m);
  });
  save_checkpoint(paths.model(), model);
  write_train_stats_csv(paths.train_stats(), stats);
  return stats;
}

CalibrateResult cmd_calibrate(const RunConfig& config, bool with_baseline) {
  config.validate();
  const auto paths = paths_for(config);
  const auto model = load_model(config);
  const auto calib_set = load_split(config, Split::calibration);
  if (calib_set.empty()) throw UsageError("calibration split is empty");

  CalibrateResult result;
  try {
    result.calibration = calibrate(model, calib_set, config.alpha, config.calibration);
  } catch (const CalibrationError& e) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["generated_at"] = utc_timestamp();
    j["error"] = e.what();
    auto& trace = j["trace"] = nlohmann::ordered_json::array();
    for (const auto& t : e.trace()) {
      trace.push_back({{"q_lower", t.q_lower}, {"q_upper", t.q_upper}, {"r_lower", t.r_lower}, {"r_upper", t.r_upper}});
    }
    write_text(paths.calibration_failure(), j.dump(2) + "\n");
    throw;
  }
  write_text(paths.calibration(), calibration_to_json(result.calibration, utc_timestamp()));
  if (with_baseline) {
    result.baseline = calibrate_baseline(model, calib_set, config.alpha, config.baseline);
    write_text(paths.baseline(), baseline_to_json(*result.baseline, utc_timestamp()));
  }
  return result;
}

EvalReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  const auto paths = paths_for(config);
  if (!fs::exists(paths.calibration())) throw UsageError("no calibration result; run calibrate first");
  const auto calibration = calibration_from_json(read_text(paths.calibration()));
  std::optional<BaselineCalibration> baseline;
  if (fs::exists(paths.baseline())) baseline = baseline_from_json(read_text(paths.baseline()));
  if (baseline && baseline->alpha != calibration.alpha) {
    throw UsageError("baseline.json and calibration.json were produced at different alpha");
  }
  const auto model = load_model(config);
  const auto test_set = load_split(config, Split::validation);
  const auto report = evaluate(model, calibration, test_set, baseline ? &*baseline : nullptr, config.eval);
  write_text(paths.eval_report(), eval_report_to_json(report, utc_timestamp()));
  write_text(paths.intensity_csv(), intensity_bins_csv(report.intensity_bins));
  write_text(paths.ssr_csv(), size_bins_csv(report.size_stratified));
  return report;
}

PdfCommandResult cmd_pdf(const RunConfig& config, const std::vector<PixelCoord>& pixels, bool oracle_mode) {
  config.validate();
  if (pixels.empty()) throw UsageError("pdf: no pixel requested");
  const auto paths = paths_for(config);
  const auto validation = load_split(config, Split::validation);
  if (validation.empty()) throw UsageError("validation split is empty");
  const Tensor& y = validation.front().y;
  for (const auto& [r, c] : pixels) {
    if (r >= y.dim(1) || c >= y.dim(2)) {
      throw UsageError("pdf: pixel (" + std::to_string(r) + "," + std::to_string(c) + ") outside the image");
    }
  }

  std::unique_ptr<QuantileRegressor> model;
  if (oracle_mode) {
    model = std::make_unique<GaussianQuantileOracle>(config.oracle_sigma);
  } else {
    model = std::make_unique<QuantileModel>(load_model(config));
  }

  const auto grid = config.q_grid();
  const QuantileSweep sweep = monotonize(quantile_sweep(*model, y, grid));
  const PdfEstimate pdf = pdf_from_quantiles(sweep);

  std::optional<ConformalizedPdf> conformal;
  if (!config.alpha_list.empty()) {
    const auto calib_set = load_split(config, Split::calibration);
    conformal = conformalized_pdf(*model, calib_set, y, config.alpha_list, config.calibration);
  }

  PdfCommandResult result;
  result.pixels = pixels;
  nlohmann::ordered_json header;
  header["schema_version"] = 1;
  header["generated_at"] = utc_timestamp();
  header["oracle_mode"] = oracle_mode;
  if (oracle_mode) header["oracle_sigma"] = config.oracle_sigma;
  header["sample"] = "first validation sample";
  header["q_grid"] = grid;
  header["monotonize_repairs"] = sweep.repair_count;
  header["alpha_list"] = config.alpha_list;
  auto& levels = header["calibrated_levels"] = nlohmann::ordered_json::array();
  if (conformal) {
    for (const auto& l : conformal->levels) {
      levels.push_back({{"alpha", l.alpha},
                        {"q_lower", l.q_lower},
                        {"q_upper", l.q_upper},
                        {"mass_lower", l.mass_lower},
                        {"mass_upper", l.mass_upper},
                        {"repaired", l.repaired}});
    }
    header["conformal_cdf_levels"] = conformal->cdf_levels;
    header["conformal_query_levels"] = conformal->query_levels;
  }

  auto write_rows = [&](const fs::path& path, const PixelPdf& p) {
    std::ostringstream os;
    os << "q_level,value,density\n";
    for (std::size_t i = 0; i < p.levels.size(); ++i) {
      os << format_double(p.levels[i]) << ',' << format_double(p.values[i]) << ',' << format_double(p.densities[i])
         << '\n';
    }
    write_text(path, os.str());
    result.csv_files.push_back(path);
  };

  auto& pixel_json = header["pixels"] = nlohmann::ordered_json::array();
  double worst = 0.0;
  for (const auto& [r, c] : pixels) {
    const std::string stem = "pixel_r" + std::to_string(r) + "_c" + std::to_string(c);
    nlohmann::ordered_json entry{{"row", r}, {"col", c}, {"file", stem + ".csv"}};
    write_rows(paths.pdf_dir() / (stem + ".csv"), pdf.at(r, c));
    if (conformal) {
      write_rows(paths.pdf_dir() / (stem + "_conformal.csv"), conformal->pdf.at(r, c));
      entry["conformal_file"] = stem + "_conformal.csv";
    }
    if (oracle_mode) {
      const auto& p = pdf.at(r, c);
      const double mu = y.at(0, r, c);
      double err = 0.0;
      for (std::size_t i = 0; i < p.levels.size(); ++i) {
        if (p.levels[i] < 0.2 - 1e-12 || p.levels[i] > 0.8 + 1e-12) continue;
        const double exact = normal_pdf(p.values[i], mu, config.oracle_sigma);
        err = std::max(err, std::abs(p.densities[i] - exact) / exact);
      }
      entry["max_rel_error_0.2_0.8"] = err;
      worst = std::max(worst, err);
    }
    pixel_json.push_back(std::move(entry));
  }
  if (oracle_mode) result.oracle_max_rel_error = worst;
  write_text(paths.pdf_dir() / "pdf_header.json", header.dump(2) + "\n");
  return result;
}

}  // namespace quantcal::tools
