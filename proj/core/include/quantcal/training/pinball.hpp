#pragma once

#include "quantcal/numerics/random.hpp"
#include "quantcal/numerics/tape.hpp"
#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

/// Mean over pixels of q*|x - x_hat| where x - x_hat >= 0, else (1-q)*|x - x_hat|.
double pinball_loss(const Tensor& target, const Tensor& prediction, double q);

/// Differentiable in `prediction`. At x == x_hat the q-branch slope (-q) is used.
Var pinball_loss(Var prediction, const Tensor& target, double q);

/// Uniform draw on [q_min, q_max].
double sample_quantile(Rng& rng, double q_min, double q_max);

}  // namespace quantcal
