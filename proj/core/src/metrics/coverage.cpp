#include "quantcal/metrics/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quantcal/numerics/parallel.hpp"
#include "quantcal/numerics/random.hpp"
#include "quantcal/numerics/stats.hpp"

namespace quantcal {

namespace {

void require_matching(std::span<const Tensor> a, std::span<const Tensor> b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": image count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) require_same_shape(a[i], b[i], what);
}

}  // namespace

RiskLengthStats risk_and_length(std::span<const UncertaintyMap> maps, std::span<const Tensor> gt) {
  if (maps.empty()) throw UsageError("risk_and_length: empty test set");
  if (maps.size() != gt.size()) throw DimensionError("risk_and_length: image count mismatch");
  RiskLengthStats out;
  std::vector<double> lengths;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    require_same_shape(m.lower, gt[i], "risk_and_length");
    require_same_shape(m.upper, gt[i], "risk_and_length");
    std::size_t missed = 0;
    for (std::size_t p = 0; p < gt[i].size(); ++p) {
      const double g = gt[i][p];
      if (g < m.lower[p] || g > m.upper[p]) ++missed;
      lengths.push_back(m.upper[p] - m.lower[p]);
    }
    out.per_image_risk.push_back(static_cast<double>(missed) / static_cast<double>(gt[i].size()));
  }
  out.risk = {mean_of(out.per_image_risk), stddev_of(out.per_image_risk)};
  out.length = {mean_of(lengths), stddev_of(lengths)};
  return out;
}

RiskLengthStats test_risk_and_length(const QuantileRegressor& model, const CalibrationResult& calibration,
                                     const PairedDataset& test_set) {
  if (test_set.empty()) throw UsageError("test_risk_and_length: empty test set");
  std::vector<UncertaintyMap> maps(test_set.size());
  std::vector<Tensor> gt(test_set.size());
  parallel_for(test_set.size(), [&](std::size_t i) {
    maps[i] = build_interval(model, test_set[i].y, calibration.q_lower_star, calibration.q_upper_star);
    gt[i] = test_set[i].x;
  });
  return risk_and_length(maps, gt);
}

std::vector<IntensityBin> intensity_stratified_lengths(std::span<const Tensor> gt_maps,
                                                       std::span<const Tensor> length_maps, std::size_t n_bins,
                                                       const BootstrapOptions& boot) {
  if (n_bins < 2) throw DomainError("intensity_stratified_lengths: need at least 2 bins");
  require_matching(gt_maps, length_maps, "intensity_stratified_lengths");
  if (gt_maps.empty()) throw UsageError("intensity_stratified_lengths: no images");

  const std::size_t n_img = gt_maps.size();
  // per-image sums and counts, so a bootstrap resample is a weighted sum
  std::vector<double> sums(n_img * n_bins, 0.0);
  std::vector<std::size_t> counts(n_img * n_bins, 0);
  for (std::size_t i = 0; i < n_img; ++i) {
    for (std::size_t p = 0; p < gt_maps[i].size(); ++p) {
      const double g = std::clamp(gt_maps[i][p], 0.0, 1.0);
      const auto b = std::min(static_cast<std::size_t>(g * static_cast<double>(n_bins)), n_bins - 1);
      sums[i * n_bins + b] += length_maps[i][p];
      ++counts[i * n_bins + b];
    }
  }

  std::vector<IntensityBin> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = static_cast<double>(b) / static_cast<double>(n_bins);
    bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    double s = 0.0;
    for (std::size_t i = 0; i < n_img; ++i) {
      s += sums[i * n_bins + b];
      bins[b].pixel_count += counts[i * n_bins + b];
    }
    if (bins[b].pixel_count > 0) bins[b].mean_length = s / static_cast<double>(bins[b].pixel_count);
  }

  std::vector<std::vector<double>> boot_means(n_bins);
  Rng rng = make_rng(derive_seed(boot.seed, "bootstrap"));
  std::uniform_int_distribution<std::size_t> pick(0, n_img - 1);
  std::vector<std::size_t> draw(n_img);
  for (std::size_t r = 0; r < boot.resamples; ++r) {
    for (auto& d : draw) d = pick(rng);
    for (std::size_t b = 0; b < n_bins; ++b) {
      double s = 0.0;
      std::size_t c = 0;
      for (std::size_t i : draw) {
        s += sums[i * n_bins + b];
        c += counts[i * n_bins + b];
      }
      if (c > 0) boot_means[b].push_back(s / static_cast<double>(c));
    }
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (!bins[b].mean_length || boot_means[b].empty()) continue;
    bins[b].ci_low = percentile_of(boot_means[b], 2.5);
    bins[b].ci_high = percentile_of(boot_means[b], 97.5);
  }
  return bins;
}

SizeStratifiedRisk size_stratified_risk(std::span<const Tensor> length_maps, std::span<const Tensor> lower,
                                        std::span<const Tensor> upper, std::span<const Tensor> gt,
                                        std::size_t n_bins) {
  if (n_bins < 2) throw DomainError("size_stratified_risk: need at least 2 bins");
  require_matching(length_maps, gt, "size_stratified_risk");
  require_matching(lower, gt, "size_stratified_risk");
  require_matching(upper, gt, "size_stratified_risk");

  std::vector<double> len;
  std::vector<char> missed;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t p = 0; p < gt[i].size(); ++p) {
      len.push_back(length_maps[i][p]);
      missed.push_back(gt[i][p] < lower[i][p] || gt[i][p] > upper[i][p]);
    }
  }
  const std::size_t n = len.size();
  if (n < n_bins) throw UsageError("size_stratified_risk: fewer pixels than bins");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return len[a] < len[b]; });

  SizeStratifiedRisk out;
  out.bins.resize(n_bins);
  std::size_t pos = 0;
  std::size_t total_missed = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t take = n / n_bins + (b < n % n_bins ? 1 : 0);
    auto& bin = out.bins[b];
    bin.pixel_count = take;
    bin.length_lo = len[order[pos]];
    bin.length_hi = len[order[pos + take - 1]];
    for (std::size_t k = pos; k < pos + take; ++k) bin.miscovered += missed[order[k]];
    bin.risk = static_cast<double>(bin.miscovered) / static_cast<double>(take);
    total_missed += bin.miscovered;
    pos += take;
  }
  out.pooled_risk = static_cast<double>(total_missed) / static_cast<double>(n);
  double weighted = 0.0;
  for (const auto& bin : out.bins) weighted += static_cast<double>(bin.pixel_count) * bin.risk;
  out.weighted_bin_risk = weighted / static_cast<double>(n);
  return out;
}

std::vector<double> default_crossing_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
}

CrossingAudit crossing_audit(std::span<const QuantileSweep> sweeps) {
  CrossingAudit out;
  for (const auto& s : sweeps) {
    const std::size_t plane = s.height() * s.width();
    const std::size_t levels = s.q_grid.size();
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t g = 0; g + 1 < levels; ++g) {
        if (s.values[g * plane + p] > s.values[(g + 1) * plane + p] + kCrossingTolerance) {
          ++out.crossed_pixels;
          break;
        }
      }
    }
    out.total_pixels += plane;
  }
  out.fraction = out.total_pixels == 0 ? 0.0
                                       : static_cast<double>(out.crossed_pixels) /
                                             static_cast<double>(out.total_pixels);
  return out;
}

CrossingAudit crossing_audit(const QuantileRegressor& model, const PairedDataset& test_set,
                             std::span<const double> q_list) {
  std::vector<QuantileSweep> sweeps;
  sweeps.reserve(test_set.size());
  for (const auto& s : test_set) sweeps.push_back(quantile_sweep(model, s.y, q_list));
  return crossing_audit(sweeps);
}

}  // namespace quantcal
