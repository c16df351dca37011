#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "quantcal/numerics/random.hpp"
#include "quantcal/numerics/tensor.hpp"

namespace quantcal {

struct NoisyMeasurement {
  Tensor y;
  double param = 0.0;  ///< the noise level actually drawn
};

/// sigma ~ U(0, sigma_max); y = clamp(x + N(0, sigma^2), 0, 1).
NoisyMeasurement add_gaussian_noise(const Tensor& x, double sigma_max, Rng& rng);
Tensor add_gaussian_noise_fixed(const Tensor& x, double sigma, Rng& rng);

/// Intensity-proportional Gaussian noise: s ~ U(0, scale_max), pixel std = s * x.
NoisyMeasurement add_heteroscedastic_noise(const Tensor& x, double scale_max, Rng& rng);
Tensor add_heteroscedastic_noise_fixed(const Tensor& x, double scale, Rng& rng);

/// lambda ~ U(lambda_min, lambda_max); y = clamp(Poisson(lambda * x) / lambda, 0, 1).
NoisyMeasurement add_poisson_noise(const Tensor& x, double lambda_min, double lambda_max, Rng& rng);
Tensor add_poisson_noise_fixed(const Tensor& x, double lambda, Rng& rng);

/// Retained k-space columns, indexed by unshifted DFT column.
struct KspaceMask {
  std::vector<bool> columns;
  std::size_t retained() const;
};

/// Keeps a fully sampled low-frequency band of round(W * center_fraction)
/// columns (at least the DC column) plus random other columns until
/// ceil(W / acceleration) are retained.
KspaceMask make_column_mask(std::size_t width, double acceleration, double center_fraction,
                            std::uint64_t mask_seed);

using ComplexImage = std::vector<std::complex<double>>;

/// Row-column 2D DFT of an H x W complex image (unnormalised forward,
/// 1/(HW) on the inverse).
ComplexImage dft2(const ComplexImage& in, std::size_t height, std::size_t width, bool inverse);

struct KspaceUndersampling {
  Tensor image;           ///< clamp(|IDFT(mask * DFT(x))|, 0, 1)
  ComplexImage spectrum;  ///< DFT(x)
  ComplexImage masked;    ///< mask * DFT(x)
  KspaceMask mask;
};

KspaceUndersampling undersample_kspace_detail(const Tensor& x, double acceleration, double center_fraction,
                                              std::uint64_t mask_seed);
Tensor undersample_kspace(const Tensor& x, double acceleration, double center_fraction, std::uint64_t mask_seed);

}  // namespace quantcal
