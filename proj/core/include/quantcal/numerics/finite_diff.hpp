#pragma once

#include <functional>

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

/// Central-difference gradient of a scalar function, one coordinate at a time.
/// Used as an oracle for the reverse-mode gradients.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double eps = 1e-5);

/// Largest |a-b| / max(|a|, |b|, floor) over all coordinates.
double max_relative_error(const Tensor& a, const Tensor& b, double floor = 1e-6);

}  // namespace quantcal
