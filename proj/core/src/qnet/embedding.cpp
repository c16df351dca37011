#include "quantcal/qnet/embedding.hpp"

#include <cmath>
#include <string>

#include "quantcal/errors.hpp"
#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

void require_quantile_level(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError(std::string(what) + ": quantile level must lie in (0,1), got " + std::to_string(q));
  }
}

void QuantileEmbeddingConfig::validate() const {
  if (dim == 0 || dim % 2 != 0) throw ConfigError("embedding dim must be a positive even integer");
  if (mlp_hidden == 0) throw ConfigError("embedding mlp_hidden must be positive");
  if (!(base_frequency > 0.0)) throw ConfigError("embedding base_frequency must be positive");
}

std::vector<double> sinusoidal_encoding(double q, const QuantileEmbeddingConfig& config) {
  require_quantile_level(q, "sinusoidal_encoding");
  config.validate();
  std::vector<double> e(config.dim);
  const double d = static_cast<double>(config.dim);
  for (std::size_t i = 0; i < config.dim / 2; ++i) {
    const double omega = std::pow(10000.0, -2.0 * static_cast<double>(i) / d);
    const double phase = config.base_frequency * q * omega;
    e[2 * i] = std::sin(phase);
    e[2 * i + 1] = std::cos(phase);
  }
  return e;
}

}  // namespace quantcal
