#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one set of parameters.
struct AdamState {
  AdamOptions options;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(AdamOptions opts, std::span<const Tensor> params);
};

/// One bias-corrected Adam step, in place. Increments state.t.
void adam_update(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace quantcal
