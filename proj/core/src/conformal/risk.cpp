#include "quantcal/conformal/risk.hpp"

#include <string>

#include "quantcal/conformal/interval.hpp"
#include "quantcal/numerics/parallel.hpp"

namespace quantcal {
namespace {

void check_inputs(std::span<const Tensor> lower, std::span<const Tensor> upper, std::span<const Tensor> gt) {
  if (lower.size() != gt.size() || upper.size() != gt.size()) {
    throw DimensionError("risk: lower, upper and ground-truth counts differ");
  }
  if (gt.empty()) throw UsageError("risk: no images");
  for (std::size_t i = 0; i < gt.size(); ++i) {
    require_same_shape(lower[i], gt[i], "risk");
    require_same_shape(upper[i], gt[i], "risk");
    if (gt[i].empty()) throw DimensionError("risk: empty image");
  }
}

}  // namespace

double empirical_risk(std::span<const Tensor> lower, std::span<const Tensor> upper, std::span<const Tensor> gt) {
  check_inputs(lower, upper, gt);
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    std::size_t miss = 0;
    for (std::size_t k = 0; k < gt[i].size(); ++k) miss += (gt[i][k] < lower[i][k] || gt[i][k] > upper[i][k]);
    acc += static_cast<double>(miss) / static_cast<double>(gt[i].size());
  }
  return acc / static_cast<double>(gt.size());
}

OneSidedRisks one_sided_risks(std::span<const Tensor> lower, std::span<const Tensor> upper,
                              std::span<const Tensor> gt) {
  check_inputs(lower, upper, gt);
  OneSidedRisks r;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    std::size_t below = 0, above = 0;
    for (std::size_t k = 0; k < gt[i].size(); ++k) {
      below += gt[i][k] < lower[i][k];
      above += gt[i][k] > upper[i][k];
    }
    const double k = static_cast<double>(gt[i].size());
    r.lower += static_cast<double>(below) / k;
    r.upper += static_cast<double>(above) / k;
  }
  r.lower /= static_cast<double>(gt.size());
  r.upper /= static_cast<double>(gt.size());
  return r;
}

OneSidedRisks one_sided_risks(const QuantileRegressor& model, const PairedDataset& calib_set, double q_lower,
                              double q_upper) {
  if (calib_set.empty()) throw UsageError("one_sided_risks: empty calibration set");
  std::vector<Tensor> lower(calib_set.size()), upper(calib_set.size()), gt(calib_set.size());
  parallel_for(calib_set.size(), [&](std::size_t i) {
    auto map = build_interval(model, calib_set[i].y, q_lower, q_upper);
    lower[i] = std::move(map.lower);
    upper[i] = std::move(map.upper);
    gt[i] = calib_set[i].x;
  });
  return one_sided_risks(lower, upper, gt);
}

double adjust_alpha(double alpha, std::size_t n_calib) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("adjust_alpha: alpha must lie in (0,1)");
  if (n_calib == 0) throw CalibrationSetTooSmallError("adjust_alpha: calibration set is empty");
  const double alpha_prime = alpha - (1.0 - alpha) / static_cast<double>(n_calib);
  if (!(alpha_prime > 0.0)) {
    throw CalibrationSetTooSmallError("calibration set of " + std::to_string(n_calib) +
                                      " samples is too small for alpha=" + std::to_string(alpha));
  }
  return alpha_prime;
}

}  // namespace quantcal
