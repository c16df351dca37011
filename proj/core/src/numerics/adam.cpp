#include "quantcal/numerics/adam.hpp"

#include <cmath>

#include "quantcal/errors.hpp"

namespace quantcal {

AdamState::AdamState(AdamOptions opts, std::span<const Tensor> params) : options(opts) {
  if (!(options.beta1 > 0.0 && options.beta1 < 1.0 && options.beta2 > 0.0 && options.beta2 < 1.0)) {
    throw DomainError("adam: beta1 and beta2 must lie in (0,1)");
  }
  m.reserve(params.size());
  v.reserve(params.size());
  for (const auto& p : params) {
    m.emplace_back(p.shape(), 0.0);
    v.emplace_back(p.shape(), 0.0);
  }
}

void adam_update(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adam_update: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || params[i].shape() != state.m[i].shape()) {
      throw DimensionError("adam_update: shape mismatch for parameter " + std::to_string(i) + ": " +
                           shape_string(params[i].shape()) + " vs " + shape_string(grads[i].shape()));
    }
  }

  state.t += 1;
  const auto& o = state.options;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= o.lr * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace quantcal
