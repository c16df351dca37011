#pragma once

#include <cstddef>
#include <vector>

namespace quantcal {

struct QuantileEmbeddingConfig {
  std::size_t dim = 32;          ///< sinusoidal width, even
  std::size_t mlp_hidden = 64;   ///< hidden width of the embedding MLP
  double base_frequency = 1000;  ///< multiplies q before the geometric frequency ladder

  void validate() const;
  friend bool operator==(const QuantileEmbeddingConfig&, const QuantileEmbeddingConfig&) = default;
};

/// Raw (pre-MLP) encoding: e[2i] = sin(base * q * w_i), e[2i+1] = cos(base * q * w_i)
/// with w_i = 10000^(-2i/dim). Throws DomainError for q outside (0,1).
std::vector<double> sinusoidal_encoding(double q, const QuantileEmbeddingConfig& config);

}  // namespace quantcal
