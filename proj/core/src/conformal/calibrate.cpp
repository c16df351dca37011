#include "quantcal/conformal/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <nlohmann/json.hpp>

#include "quantcal/conformal/interval.hpp"
#include "quantcal/numerics/parallel.hpp"

namespace quantcal {
namespace {

// Caches the median maps and the most recent per-level predictions, since
// the search revisits levels while it oscillates around the budget.
class LevelCache {
 public:
  LevelCache(const QuantileRegressor& model, const PairedDataset& set) : model_(model), set_(set) {
    median_ = predict_all(0.5);
  }

  const std::vector<Tensor>& at(double q) {
    for (const auto& [level, maps] : entries_)
      if (level == q) return maps;
    if (entries_.size() >= kCapacity) entries_.pop_front();
    entries_.emplace_back(q, predict_all(q));
    return entries_.back().second;
  }

  const std::vector<Tensor>& median() const { return median_; }

 private:
  static constexpr std::size_t kCapacity = 8;

  std::vector<Tensor> predict_all(double q) const {
    std::vector<Tensor> out(set_.size());
    parallel_for(set_.size(), [&](std::size_t i) { out[i] = model_.predict(set_[i].y, q); });
    return out;
  }

  const QuantileRegressor& model_;
  const PairedDataset& set_;
  std::vector<Tensor> median_;
  std::deque<std::pair<double, std::vector<Tensor>>> entries_;
};

OneSidedRisks cached_risks(LevelCache& cache, const PairedDataset& set, double q_lower, double q_upper) {
  // copies: at() may evict the other level
  const std::vector<Tensor> lo = cache.at(q_lower);
  const std::vector<Tensor>& hi = cache.at(q_upper);
  OneSidedRisks r;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Tensor& gt = set[i].x;
    const Tensor& m = cache.median()[i];
    std::size_t below = 0, above = 0;
    for (std::size_t k = 0; k < gt.size(); ++k) {
      const double lower = std::min({lo[i][k], m[k], hi[i][k]});
      const double upper = std::max({lo[i][k], m[k], hi[i][k]});
      below += gt[k] < lower;
      above += gt[k] > upper;
    }
    r.lower += static_cast<double>(below) / static_cast<double>(gt.size());
    r.upper += static_cast<double>(above) / static_cast<double>(gt.size());
  }
  r.lower /= static_cast<double>(set.size());
  r.upper /= static_cast<double>(set.size());
  return r;
}

}  // namespace

CalibrationResult calibrate(const QuantileRegressor& model, const PairedDataset& calib_set, double alpha,
                            const CalibrationOptions& options) {
  if (calib_set.empty()) throw UsageError("calibrate: calibration set is empty");
  if (!(options.delta_q > 0.0)) throw DomainError("calibrate: delta_q must be positive");
  if (!(options.q_floor > 0.0 && options.q_floor < options.q_ceil && options.q_ceil < 1.0)) {
    throw DomainError("calibrate: need 0 < q_floor < q_ceil < 1");
  }
  const double alpha_prime = adjust_alpha(alpha, calib_set.size());
  const double budget = alpha_prime / 2.0;
  const double pixel_risk =
      1.0 / (static_cast<double>(calib_set.size()) * static_cast<double>(calib_set.front().x.size()));

  LevelCache cache(model, calib_set);
  auto clamp_q = [&](double q) { return std::clamp(q, options.q_floor, options.q_ceil); };

  CalibrationResult result;
  result.alpha = alpha;
  result.alpha_prime = alpha_prime;

  // (alpha', 1 - alpha') is an empty interval once alpha' >= 0.5; start at
  // the per-side budget point instead.
  const double start = alpha_prime < 0.5 ? alpha_prime : budget;
  double q_lower = clamp_q(start), q_upper = clamp_q(1.0 - start);
  double step_lower = options.delta_q, step_upper = options.delta_q;
  int dir_lower = 0, dir_upper = 0;

  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    const OneSidedRisks r = cached_risks(cache, calib_set, q_lower, q_upper);
    result.trace.push_back({q_lower, q_upper, r.lower, r.upper});

    if (r.total() <= alpha_prime) {
      auto in_window = [&](double risk) { return risk > budget - pixel_risk && risk <= budget; };
      const bool tight = in_window(r.lower) && in_window(r.upper);
      const bool resolved = step_lower < options.min_step && step_upper < options.min_step &&
                            r.lower <= budget + pixel_risk && r.upper <= budget + pixel_risk;
      if (tight || resolved) {
        result.q_lower_star = q_lower;
        result.q_upper_star = q_upper;
        result.achieved_risk = r.total();
        result.achieved_risk_lower = r.lower;
        result.achieved_risk_upper = r.upper;
        result.iterations = iter;
        return result;
      }
    }

    // lower bound tightens upwards, upper bound tightens downwards
    const int want_lower = r.lower <= budget ? +1 : -1;
    const int want_upper = r.upper <= budget ? -1 : +1;
    if (dir_lower != 0 && want_lower != dir_lower) step_lower /= 2.0;
    if (dir_upper != 0 && want_upper != dir_upper) step_upper /= 2.0;
    const bool hold_lower = step_lower < options.min_step && r.lower <= budget;
    const bool hold_upper = step_upper < options.min_step && r.upper <= budget;
    if (!hold_lower) {
      q_lower = clamp_q(q_lower + want_lower * step_lower);
      dir_lower = want_lower;
    }
    if (!hold_upper) {
      q_upper = clamp_q(q_upper + want_upper * step_upper);
      dir_upper = want_upper;
    }
    if (q_lower >= q_upper) {
      throw BoundsCollapseError("calibrate: bounds collapsed at iteration " + std::to_string(iter) +
                                    " (q_lower=" + std::to_string(q_lower) + ", q_upper=" + std::to_string(q_upper) +
                                    ")",
                                std::move(result.trace));
    }
  }
  const auto& last = result.trace.back();
  throw CalibrationError("calibrate: risk target " + std::to_string(alpha_prime) + " not reached after " +
                             std::to_string(options.max_iters) + " iterations (last risk " +
                             std::to_string(last.r_lower + last.r_upper) + ")",
                         std::move(result.trace));
}

std::string calibration_to_json(const CalibrationResult& r, std::string_view generated_at) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["q_lower_star"] = r.q_lower_star;
  j["q_upper_star"] = r.q_upper_star;
  j["alpha"] = r.alpha;
  j["alpha_prime"] = r.alpha_prime;
  j["achieved_risk"] = r.achieved_risk;
  j["achieved_risk_lower"] = r.achieved_risk_lower;
  j["achieved_risk_upper"] = r.achieved_risk_upper;
  j["iterations"] = r.iterations;
  auto& trace = j["trace"] = nlohmann::ordered_json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"q_lower", t.q_lower}, {"q_upper", t.q_upper}, {"r_lower", t.r_lower}, {"r_upper", t.r_upper}});
  }
  if (!generated_at.empty()) j["generated_at"] = std::string(generated_at);
  return j.dump(2) + "\n";
}

CalibrationResult calibration_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CalibrationResult r;
    r.q_lower_star = j.at("q_lower_star").get<double>();
    r.q_upper_star = j.at("q_upper_star").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.alpha_prime = j.at("alpha_prime").get<double>();
    r.achieved_risk = j.at("achieved_risk").get<double>();
    r.achieved_risk_lower = j.at("achieved_risk_lower").get<double>();
    r.achieved_risk_upper = j.at("achieved_risk_upper").get<double>();
    r.iterations = j.at("iterations").get<std::size_t>();
    for (const auto& t : j.at("trace")) {
      r.trace.push_back({t.at("q_lower").get<double>(), t.at("q_upper").get<double>(), t.at("r_lower").get<double>(),
                         t.at("r_upper").get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("calibration JSON: ") + e.what());
  }
}

}  // namespace quantcal
