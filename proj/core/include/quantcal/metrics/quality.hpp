#pragma once

#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

struct ImageQuality {
  double mse = 0.0;
  double psnr = 0.0;  ///< +inf when mse is 0
  double ssim = 0.0;
};

double mse(const Tensor& estimate, const Tensor& truth);
/// 10 log10(1 / mse) for data range 1.
double psnr_from_mse(double mse);
/// Mean SSIM over every valid 7x7 window (Gaussian weights, sigma 1.5,
/// K1 0.01, K2 0.03, data range 1). Accepts [H,W] or [1,H,W].
double ssim(const Tensor& estimate, const Tensor& truth);

ImageQuality image_quality(const Tensor& estimate, const Tensor& truth);

}  // namespace quantcal
