#include "quantcal/conformal/baseline.hpp"

#include <nlohmann/json.hpp>

#include "quantcal/numerics/parallel.hpp"

namespace quantcal {

UncertaintyMap scale_interval(const UncertaintyMap& raw, double lambda) {
  UncertaintyMap out = raw;
  for (std::size_t k = 0; k < raw.median.size(); ++k) {
    const double m = raw.median[k];
    out.lower[k] = m - lambda * (m - raw.lower[k]);
    out.upper[k] = m + lambda * (raw.upper[k] - m);
  }
  return out;
}

BaselineCalibration calibrate_baseline(const QuantileRegressor& model, const PairedDataset& calib_set, double alpha,
                                       const BaselineOptions& options) {
  if (calib_set.empty()) throw UsageError("calibrate_baseline: calibration set is empty");
  if (!(options.lambda_max > 0.0 && options.tolerance > 0.0)) {
    throw DomainError("calibrate_baseline: lambda_max and tolerance must be positive");
  }
  BaselineCalibration result;
  result.q_lower = options.q_lower;
  result.q_upper = options.q_upper;
  result.alpha = alpha;
  result.alpha_prime = adjust_alpha(alpha, calib_set.size());

  std::vector<UncertaintyMap> raw(calib_set.size());
  parallel_for(calib_set.size(), [&](std::size_t i) {
    raw[i] = build_interval(model, calib_set[i].y, options.q_lower, options.q_upper);
  });

  auto risk_at = [&](double lambda) {
    std::vector<Tensor> lower, upper, gt;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto scaled = scale_interval(raw[i], lambda);
      lower.push_back(std::move(scaled.lower));
      upper.push_back(std::move(scaled.upper));
      gt.push_back(calib_set[i].x);
    }
    return empirical_risk(lower, upper, gt);
  };

  double hi = options.lambda_max;
  double hi_risk = risk_at(hi);
  if (hi_risk > result.alpha_prime) {
    throw BaselineError("calibrate_baseline: risk " + std::to_string(hi_risk) + " at lambda_max=" +
                        std::to_string(hi) + " still exceeds alpha'=" + std::to_string(result.alpha_prime));
  }
  double lo = 0.0;
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double r = risk_at(mid);
    if (r <= result.alpha_prime) {
      hi = mid;
      hi_risk = r;
    } else {
      lo = mid;
    }
    ++result.iterations;
  }
  result.lambda_star = hi;
  result.achieved_risk = hi_risk;
  return result;
}

UncertaintyMap build_baseline_interval(const QuantileRegressor& model, const Tensor& y,
                                       const BaselineCalibration& calibration) {
  return scale_interval(build_interval(model, y, calibration.q_lower, calibration.q_upper), calibration.lambda_star);
}

std::string baseline_to_json(const BaselineCalibration& b, std::string_view generated_at) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["lambda_star"] = b.lambda_star;
  j["q_lower"] = b.q_lower;
  j["q_upper"] = b.q_upper;
  j["alpha"] = b.alpha;
  j["alpha_prime"] = b.alpha_prime;
  j["achieved_risk"] = b.achieved_risk;
  j["iterations"] = b.iterations;
  if (!generated_at.empty()) j["generated_at"] = std::string(generated_at);
  return j.dump(2) + "\n";
}

BaselineCalibration baseline_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BaselineCalibration b;
    b.lambda_star = j.at("lambda_star").get<double>();
    b.q_lower = j.at("q_lower").get<double>();
    b.q_upper = j.at("q_upper").get<double>();
    b.alpha = j.at("alpha").get<double>();
    b.alpha_prime = j.at("alpha_prime").get<double>();
    b.achieved_risk = j.at("achieved_risk").get<double>();
    b.iterations = j.at("iterations").get<std::size_t>();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("baseline JSON: ") + e.what());
  }
}

}  // namespace quantcal
