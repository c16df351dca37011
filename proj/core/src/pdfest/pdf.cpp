#include "quantcal/pdfest/pdf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quantcal/numerics/parallel.hpp"

namespace quantcal {

std::vector<double> QuantileSweep::pixel(std::size_t row, std::size_t col) const {
  const std::size_t plane = height() * width();
  std::vector<double> out(q_grid.size());
  for (std::size_t g = 0; g < q_grid.size(); ++g) out[g] = values[g * plane + row * width() + col];
  return out;
}

std::vector<double> linspace_grid(double lo, double hi, std::size_t count) {
  if (count < 2) throw DomainError("linspace_grid: need at least 2 levels");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return g;
}

std::vector<double> default_q_grid() { return linspace_grid(0.02, 0.98, 33); }

void validate_q_grid(std::span<const double> q_grid) {
  if (q_grid.size() < 3) throw DomainError("quantile grid needs at least 3 levels");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    require_quantile_level(q_grid[i], "quantile grid");
    if (i > 0 && !(q_grid[i] > q_grid[i - 1])) throw DomainError("quantile grid must be strictly ascending");
  }
}

QuantileSweep quantile_sweep(const QuantileRegressor& model, const Tensor& y, std::span<const double> q_grid) {
  validate_q_grid(q_grid);
  std::vector<Tensor> maps(q_grid.size());
  parallel_for(q_grid.size(), [&](std::size_t g) { maps[g] = model.predict(y, q_grid[g]); });
  const Shape& s = maps[0].shape();
  if (s.size() != 3 || s[0] != 1) throw DimensionError("quantile_sweep: predictions must be [1,H,W]");
  std::vector<double> data;
  data.reserve(q_grid.size() * maps[0].size());
  for (const auto& m : maps) data.insert(data.end(), m.values().begin(), m.values().end());
  return QuantileSweep{{q_grid.begin(), q_grid.end()}, Tensor({q_grid.size(), s[1], s[2]}, std::move(data)), false, 0};
}

QuantileSweep monotonize(QuantileSweep sweep) {
  const std::size_t n = sweep.q_grid.size();
  const std::size_t plane = sweep.height() * sweep.width();
  std::vector<double> curve(n);
  std::size_t repairs = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t g = 0; g < n; ++g) curve[g] = sweep.values[g * plane + p];
    if (std::is_sorted(curve.begin(), curve.end())) continue;
    std::sort(curve.begin(), curve.end());
    for (std::size_t g = 0; g < n; ++g) sweep.values[g * plane + p] = curve[g];
    ++repairs;
  }
  sweep.monotonized = true;
  sweep.repair_count = repairs;
  return sweep;
}

PixelPdf pixel_pdf_from_quantiles(std::span<const double> levels, std::span<const double> values,
                                  double slope_floor) {
  if (levels.size() != values.size()) throw DimensionError("pixel_pdf_from_quantiles: length mismatch");
  if (levels.size() < 3) throw DomainError("pixel_pdf_from_quantiles: need at least 3 levels");
  PixelPdf out;
  for (std::size_t i = 1; i + 1 < levels.size(); ++i) {
    const double slope = (values[i + 1] - values[i - 1]) / (levels[i + 1] - levels[i - 1]);
    out.levels.push_back(levels[i]);
    out.values.push_back(values[i]);
    out.densities.push_back(1.0 / std::max(slope, slope_floor));
  }
  return out;
}

PdfEstimate pdf_from_quantiles(const QuantileSweep& sweep, double slope_floor) {
  validate_q_grid(sweep.q_grid);
  PdfEstimate est;
  est.q_grid = sweep.q_grid;
  est.height = sweep.height();
  est.width = sweep.width();
  est.pixels.reserve(est.height * est.width);
  for (std::size_t r = 0; r < est.height; ++r)
    for (std::size_t c = 0; c < est.width; ++c)
      est.pixels.push_back(pixel_pdf_from_quantiles(sweep.q_grid, sweep.pixel(r, c), slope_floor));
  return est;
}

double density_mass(const PixelPdf& pdf, double v_lo, double v_hi) {
  const auto& v = pdf.values;
  const auto& p = pdf.densities;
  if (v.size() < 2) throw DomainError("density_mass: need at least 2 density samples");
  if (v_hi < v_lo) std::swap(v_lo, v_hi);
  auto density_at = [&](double x) {
    if (x <= v.front()) return p.front();
    if (x >= v.back()) return p.back();
    const auto it = std::upper_bound(v.begin(), v.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - v.begin());
    const double t = (x - v[j - 1]) / (v[j] - v[j - 1]);
    return p[j - 1] + t * (p[j] - p[j - 1]);
  };
  std::vector<std::pair<double, double>> pts{{v_lo, density_at(v_lo)}};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > v_lo && v[i] < v_hi) pts.emplace_back(v[i], p[i]);
  pts.emplace_back(v_hi, density_at(v_hi));
  double mass = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    mass += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
  }
  return mass;
}

std::vector<CalibratedLevel> repair_nesting(std::vector<CalibratedLevel> levels) {
  // ascending alpha: lower bounds and tail masses may only grow, upper bounds only shrink
  for (std::size_t i = 1; i < levels.size(); ++i) {
    auto& cur = levels[i];
    const auto& prev = levels[i - 1];
    const CalibratedLevel before = cur;
    cur.q_lower = std::max(cur.q_lower, prev.q_lower);
    cur.q_upper = std::min(cur.q_upper, prev.q_upper);
    cur.mass_lower = std::max(cur.mass_lower, prev.mass_lower);
    cur.mass_upper = std::max(cur.mass_upper, prev.mass_upper);
    cur.repaired = cur.q_lower != before.q_lower || cur.q_upper != before.q_upper ||
                   cur.mass_lower != before.mass_lower || cur.mass_upper != before.mass_upper;
  }
  return levels;
}

std::vector<CalibratedLevel> calibrate_levels(const QuantileRegressor& model, const PairedDataset& calib_set,
                                              std::span<const double> alpha_list,
                                              const CalibrationOptions& options) {
  if (alpha_list.empty()) throw DomainError("conformalized_pdf: alpha_list is empty");
  for (std::size_t i = 0; i < alpha_list.size(); ++i) {
    if (!(alpha_list[i] > 0.0 && alpha_list[i] < 1.0)) throw DomainError("conformalized_pdf: alpha outside (0,1)");
    if (i > 0 && !(alpha_list[i] > alpha_list[i - 1])) {
      throw DomainError("conformalized_pdf: alpha_list must be strictly ascending");
    }
  }
  if (calib_set.empty()) throw UsageError("conformalized_pdf: calibration set is empty");

  std::vector<CalibratedLevel> levels;
  std::vector<double> failed;
  for (double alpha : alpha_list) {
    try {
      const auto r = calibrate(model, calib_set, alpha, options);
      levels.push_back({alpha, r.q_lower_star, r.q_upper_star, r.achieved_risk_lower, r.achieved_risk_upper, false});
    } catch (const CalibrationError&) {
      failed.push_back(alpha);
    } catch (const CalibrationSetTooSmallError&) {
      failed.push_back(alpha);
    }
  }
  if (!failed.empty()) {
    std::ostringstream os;
    os << "conformalized_pdf: calibration failed for alpha =";
    for (double a : failed) os << ' ' << a;
    throw PartialResultError(os.str(), std::move(failed), std::move(levels));
  }

  return repair_nesting(std::move(levels));
}

ConformalizedPdf conformalized_pdf(const QuantileRegressor& model, const Tensor& y,
                                   std::vector<CalibratedLevel> levels) {
  // (cdf level, query level) samples: every calibrated bound plus the median
  std::vector<std::pair<double, double>> points{{0.5, 0.5}};
  for (const auto& l : levels) {
    points.emplace_back(l.mass_lower, l.q_lower);
    points.emplace_back(1.0 - l.mass_upper, l.q_upper);
  }
  std::sort(points.begin(), points.end());
  ConformalizedPdf out;
  out.levels = std::move(levels);
  for (const auto& [cdf, q] : points) {
    if (!(cdf > 0.0 && cdf < 1.0)) continue;
    if (!out.cdf_levels.empty() && (cdf <= out.cdf_levels.back() || q <= out.query_levels.back())) continue;
    out.cdf_levels.push_back(cdf);
    out.query_levels.push_back(q);
  }
  if (out.cdf_levels.size() < 3) {
    throw DomainError("conformalized_pdf: fewer than 3 distinct calibrated levels");
  }

  // sweep on the query levels, re-indexed by CDF level
  QuantileSweep sweep = monotonize(quantile_sweep(model, y, out.query_levels));
  out.sweep = sweep;
  sweep.q_grid = out.cdf_levels;
  out.pdf = pdf_from_quantiles(sweep);
  return out;
}

ConformalizedPdf conformalized_pdf(const QuantileRegressor& model, const PairedDataset& calib_set, const Tensor& y,
                                   std::span<const double> alpha_list, const CalibrationOptions& options) {
  return conformalized_pdf(model, y, calibrate_levels(model, calib_set, alpha_list, options));
}

}  // namespace quantcal
