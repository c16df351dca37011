#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "quantcal/tools/commands.hpp"

namespace qt = quantcal::tools;

namespace {

qt::PixelCoord parse_pixel(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw quantcal::UsageError("--pixel expects ROW,COL, got " + text);
  try {
    return {std::stoul(text.substr(0, comma)), std::stoul(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw quantcal::UsageError("--pixel expects ROW,COL, got " + text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile regression with conformal calibration of the quantile bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool baseline = false;
  bool oracle_mode = false;
  std::vector<std::string> pixel_args;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out_dir, "override output.dir");
  };
  auto* simulate = app.add_subcommand("simulate", "write the simulated dataset and its manifest");
  auto* train = app.add_subcommand("train", "train the quantile network");
  auto* calibrate = app.add_subcommand("calibrate", "calibrate the quantile bounds");
  auto* evaluate = app.add_subcommand("evaluate", "write the evaluation report on the validation split");
  auto* pdf = app.add_subcommand("pdf", "export per-pixel densities");
  for (auto* s : {simulate, train, calibrate, evaluate, pdf}) common(s);
  calibrate->add_flag("--baseline", baseline, "also calibrate the constant-scaling baseline");
  pdf->add_flag("--oracle-mode", oracle_mode, "use the analytic Gaussian quantile oracle instead of the model");
  pdf->add_option("--pixel", pixel_args, "ROW,COL (repeatable)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = qt::load_config(config_path);
    if (seed) config.set_seed(*seed);
    if (!out_dir.empty()) config.output_dir = out_dir;

    if (simulate->parsed()) {
      const auto r = qt::cmd_simulate(config);
      std::cout << "wrote " << r.manifest.size() << " samples to " << qt::paths_for(config).data_dir() << '\n';
    } else if (train->parsed()) {
      const auto stats = qt::cmd_train(config);
      const auto& last = stats.epochs.back();
      std::cout << "trained " << stats.epochs.size() << " epochs (" << stats.steps
                << " steps), final pinball " << last.mean_pinball << ", val mse " << last.val_mse << '\n';
    } else if (calibrate->parsed()) {
      const auto r = qt::cmd_calibrate(config, baseline);
      std::cout << "q_lower* " << r.calibration.q_lower_star << ", q_upper* " << r.calibration.q_upper_star
                << ", risk " << r.calibration.achieved_risk << " after " << r.calibration.iterations
                << " iterations\n";
      if (r.baseline) std::cout << "baseline lambda* " << r.baseline->lambda_star << '\n';
    } else if (evaluate->parsed()) {
      const auto r = qt::cmd_evaluate(config);
      std::cout << "test risk " << r.total_risk.mean << " +- " << r.total_risk.std << ", length "
                << r.interval_length.mean << " +- " << r.interval_length.std << '\n';
    } else if (pdf->parsed()) {
      std::vector<qt::PixelCoord> pixels;
      for (const auto& p : pixel_args) pixels.push_back(parse_pixel(p));
      const auto r = qt::cmd_pdf(config, pixels, oracle_mode);
      std::cout << "wrote " << r.csv_files.size() << " density files to " << qt::paths_for(config).pdf_dir() << '\n';
      if (r.oracle_max_rel_error) std::cout << "oracle max relative error " << *r.oracle_max_rel_error << '\n';
    }
  } catch (const quantcal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const quantcal::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
