#include "quantcal/qnet/oracles.hpp"

#include "quantcal/numerics/stats.hpp"

namespace quantcal {

Tensor PixelQuantileOracle::predict(const Tensor& y, double q) const {
  require_quantile_level(q, "PixelQuantileOracle");
  Tensor out = y;
  for (auto& v : out.data()) v = fn_(v, q);
  return out;
}

GaussianQuantileOracle::GaussianQuantileOracle(double sigma) : sigma_([sigma](double) { return sigma; }) {}

Tensor GaussianQuantileOracle::predict(const Tensor& y, double q) const {
  require_quantile_level(q, "GaussianQuantileOracle");
  const double z = normal_quantile(q);
  Tensor out = y;
  for (auto& v : out.data()) v = v + sigma_(v) * z;
  return out;
}

}  // namespace quantcal
