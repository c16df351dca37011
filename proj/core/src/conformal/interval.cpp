#include "quantcal/conformal/interval.hpp"

#include <algorithm>

#include "quantcal/errors.hpp"

namespace quantcal {

UncertaintyMap repair_triple(Tensor lower, Tensor median, Tensor upper) {
  require_same_shape(lower, median, "repair_triple");
  require_same_shape(lower, upper, "repair_triple");
  UncertaintyMap out{std::move(lower), std::move(median), std::move(upper), 0};
  for (std::size_t i = 0; i < out.lower.size(); ++i) {
    double a = out.lower[i], b = out.median[i], c = out.upper[i];
    if (a <= b && b <= c) continue;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    out.lower[i] = a;
    out.median[i] = b;
    out.upper[i] = c;
    ++out.repair_count;
  }
  return out;
}

UncertaintyMap build_interval(const QuantileRegressor& model, const Tensor& y, double q_lower, double q_upper) {
  require_quantile_level(q_lower, "build_interval");
  require_quantile_level(q_upper, "build_interval");
  if (!(q_lower < q_upper)) throw DomainError("build_interval: need q_lower < q_upper");
  return repair_triple(model.predict(y, q_lower), model.predict(y, 0.5), model.predict(y, q_upper));
}

}  // namespace quantcal
