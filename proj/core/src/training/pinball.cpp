#include "quantcal/training/pinball.hpp"

#include <cmath>
#include <random>

#include "quantcal/errors.hpp"
#include "quantcal/qnet/regressor.hpp"

namespace quantcal {

double pinball_loss(const Tensor& target, const Tensor& prediction, double q) {
  require_quantile_level(q, "pinball_loss");
  require_same_shape(target, prediction, "pinball_loss");
  if (target.empty()) throw DimensionError("pinball_loss: empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double diff = target[i] - prediction[i];
    acc += diff >= 0.0 ? q * diff : (1.0 - q) * (-diff);
  }
  return acc / static_cast<double>(target.size());
}

Var pinball_loss(Var prediction, const Tensor& target, double q) {
  Tape& tape = *prediction.tape;
  const double value = pinball_loss(target, tape.value(prediction), q);
  return tape.record(Tensor::scalar(value), tape.requires_grad(prediction),
                     [pred = prediction.id, target, q](Tape& tp, std::size_t self) {
                       const double g = tp.grad_buffer(self)[0] / static_cast<double>(target.size());
                       const Tensor& p = tp.value(pred);
                       Tensor& gp = tp.grad_buffer(pred);
                       for (std::size_t i = 0; i < p.size(); ++i) {
                         gp[i] += (target[i] - p[i] >= 0.0) ? -q * g : (1.0 - q) * g;
                       }
                     });
}

double sample_quantile(Rng& rng, double q_min, double q_max) {
  if (!(q_min > 0.0 && q_min < q_max && q_max < 1.0)) {
    throw DomainError("sample_quantile: need 0 < q_min < q_max < 1");
  }
  return std::uniform_real_distribution<double>(q_min, q_max)(rng);
}

}  // namespace quantcal
