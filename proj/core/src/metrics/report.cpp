#include "quantcal/metrics/report.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quantcal/datasim/io.hpp"
#include "quantcal/numerics/parallel.hpp"

namespace quantcal {

namespace {

using nlohmann::ordered_json;

ordered_json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json finite_or_string(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string csv_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

EvalReport evaluate(const QuantileRegressor& model, const CalibrationResult& calibration, const PairedDataset& test_set,
                    const BaselineCalibration* baseline, const EvalOptions& options) {
  if (test_set.empty()) throw UsageError("evaluate: empty test set");
  const std::size_t n = test_set.size();
  std::vector<UncertaintyMap> maps(n);
  std::vector<Tensor> gt(n), lengths(n), lower(n), upper(n);
  std::vector<ImageQuality> quality(n);
  std::vector<QuantileSweep> sweeps(n);
  parallel_for(n, [&](std::size_t i) {
    maps[i] = build_interval(model, test_set[i].y, calibration.q_lower_star, calibration.q_upper_star);
    gt[i] = test_set[i].x;
    lengths[i] = maps[i].length();
    lower[i] = maps[i].lower;
    upper[i] = maps[i].upper;
    quality[i] = image_quality(maps[i].median, gt[i]);
  });
  for (std::size_t i = 0; i < n; ++i) sweeps[i] = quantile_sweep(model, test_set[i].y, options.crossing_grid);

  EvalReport r;
  r.alpha = calibration.alpha;
  r.q_lower_star = calibration.q_lower_star;
  r.q_upper_star = calibration.q_upper_star;
  r.n_images = n;
  const auto stats = risk_and_length(maps, gt);
  r.total_risk = stats.risk;
  r.interval_length = stats.length;
  r.intensity_bins = intensity_stratified_lengths(gt, lengths, options.intensity_bins, options.bootstrap);
  r.size_stratified = size_stratified_risk(lengths, lower, upper, gt, options.size_bins);
  r.crossing = crossing_audit(sweeps);

  for (const auto& q : quality) {
    r.quality.mse += q.mse / static_cast<double>(n);
    r.quality.ssim += q.ssim / static_cast<double>(n);
  }
  r.quality.psnr = psnr_from_mse(r.quality.mse);

  if (baseline != nullptr) {
    std::vector<UncertaintyMap> bmaps(n);
    parallel_for(n, [&](std::size_t i) { bmaps[i] = build_baseline_interval(model, test_set[i].y, *baseline); });
    const auto b = risk_and_length(bmaps, gt);
    r.baseline = MethodSummary{b.risk, b.length};
    r.baseline_lambda = baseline->lambda_star;
  }
  return r;
}

std::string eval_report_to_json(const EvalReport& r, std::string_view generated_at) {
  ordered_json j;
  j["schema_version"] = 1;
  if (!generated_at.empty()) j["generated_at"] = generated_at;
  j["alpha"] = r.alpha;
  j["q_lower_star"] = r.q_lower_star;
  j["q_upper_star"] = r.q_upper_star;
  j["n_images"] = r.n_images;
  j["total_risk"] = mean_std_json(r.total_risk);
  j["interval_length"] = mean_std_json(r.interval_length);

  auto& ib = j["intensity_bins"] = ordered_json::array();
  for (const auto& b : r.intensity_bins) {
    ib.push_back({{"lo", b.lo},
                  {"hi", b.hi},
                  {"pixel_count", b.pixel_count},
                  {"mean_length", optional_json(b.mean_length)},
                  {"ci_low", optional_json(b.ci_low)},
                  {"ci_high", optional_json(b.ci_high)}});
  }

  ordered_json ssr;
  auto& sb = ssr["bins"] = ordered_json::array();
  for (const auto& b : r.size_stratified.bins) {
    sb.push_back({{"length_lo", b.length_lo},
                  {"length_hi", b.length_hi},
                  {"pixel_count", b.pixel_count},
                  {"miscovered", b.miscovered},
                  {"risk", b.risk}});
  }
  ssr["pooled_risk"] = r.size_stratified.pooled_risk;
  ssr["weighted_bin_risk"] = r.size_stratified.weighted_bin_risk;
  ssr["matches_total_risk"] = std::abs(r.size_stratified.weighted_bin_risk - r.total_risk.mean) < 1e-12;
  j["size_stratified_risk"] = std::move(ssr);

  j["crossing"] = {{"crossed_pixels", r.crossing.crossed_pixels},
                   {"total_pixels", r.crossing.total_pixels},
                   {"fraction", r.crossing.fraction}};
  j["image_quality"] = {{"mse", r.quality.mse}, {"psnr", finite_or_string(r.quality.psnr)}, {"ssim", r.quality.ssim}};

  if (r.baseline) {
    j["comparison"] = {{"alpha", r.alpha},
                       {"qutcc", {{"risk", mean_std_json(r.total_risk)}, {"length", mean_std_json(r.interval_length)}}},
                       {"baseline",
                        {{"lambda_star", *r.baseline_lambda},
                         {"risk", mean_std_json(r.baseline->risk)},
                         {"length", mean_std_json(r.baseline->length)}}}};
  }
  return j.dump(2) + "\n";
}

std::string intensity_bins_csv(const std::vector<IntensityBin>& bins) {
  std::ostringstream os;
  os << "bin,lo,hi,pixel_count,mean_length,ci_low,ci_high\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const auto& x = bins[b];
    os << b << ',' << format_double(x.lo) << ',' << format_double(x.hi) << ',' << x.pixel_count << ','
       << csv_optional(x.mean_length) << ',' << csv_optional(x.ci_low) << ',' << csv_optional(x.ci_high) << '\n';
  }
  return os.str();
}

std::string size_bins_csv(const SizeStratifiedRisk& ssr) {
  std::ostringstream os;
  os << "bin,length_lo,length_hi,pixel_count,miscovered,risk\n";
  for (std::size_t b = 0; b < ssr.bins.size(); ++b) {
    const auto& x = ssr.bins[b];
    os << b << ',' << format_double(x.length_lo) << ',' << format_double(x.length_hi) << ',' << x.pixel_count << ','
       << x.miscovered << ',' << format_double(x.risk) << '\n';
  }
  return os.str();
}

}  // namespace quantcal
