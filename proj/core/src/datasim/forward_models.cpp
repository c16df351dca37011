#include "quantcal/datasim/forward_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "quantcal/errors.hpp"

namespace quantcal {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double uniform(Rng& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void require_image(const Tensor& x, const char* what) {
  if (x.rank() != 3 || x.dim(0) != 1) throw DimensionError(std::string(what) + ": expected [1,H,W] image");
}

}  // namespace

Tensor add_gaussian_noise_fixed(const Tensor& x, double sigma, Rng& rng) {
  if (sigma < 0.0) throw DomainError("gaussian noise: sigma must be nonnegative");
  Tensor y = x;
  if (sigma == 0.0) return y;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& v : y.data()) v = clamp01(v + noise(rng));
  return y;
}

NoisyMeasurement add_gaussian_noise(const Tensor& x, double sigma_max, Rng& rng) {
  if (sigma_max < 0.0) throw DomainError("gaussian noise: sigma_max must be nonnegative");
  const double sigma = uniform(rng, 0.0, sigma_max);
  return {add_gaussian_noise_fixed(x, sigma, rng), sigma};
}

Tensor add_heteroscedastic_noise_fixed(const Tensor& x, double scale, Rng& rng) {
  if (scale < 0.0) throw DomainError("heteroscedastic noise: scale must be nonnegative");
  Tensor y = x;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& v : y.data()) v = clamp01(v + scale * v * noise(rng));
  return y;
}

NoisyMeasurement add_heteroscedastic_noise(const Tensor& x, double scale_max, Rng& rng) {
  if (scale_max < 0.0) throw DomainError("heteroscedastic noise: scale_max must be nonnegative");
  const double scale = uniform(rng, 0.0, scale_max);
  return {add_heteroscedastic_noise_fixed(x, scale, rng), scale};
}

Tensor add_poisson_noise_fixed(const Tensor& x, double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw DomainError("poisson noise: lambda must be positive");
  Tensor y = x;
  for (auto& v : y.data()) {
    const double rate = lambda * std::max(v, 0.0);
    if (rate <= 0.0) {
      v = 0.0;
      continue;
    }
    std::poisson_distribution<long long> counts(rate);
    v = clamp01(static_cast<double>(counts(rng)) / lambda);
  }
  return y;
}

NoisyMeasurement add_poisson_noise(const Tensor& x, double lambda_min, double lambda_max, Rng& rng) {
  if (!(lambda_min > 0.0 && lambda_min <= lambda_max)) {
    throw DomainError("poisson noise: need 0 < lambda_min <= lambda_max");
  }
  const double lambda = uniform(rng, lambda_min, lambda_max);
  return {add_poisson_noise_fixed(x, lambda, rng), lambda};
}

std::size_t KspaceMask::retained() const { return static_cast<std::size_t>(std::count(columns.begin(), columns.end(), true)); }

KspaceMask make_column_mask(std::size_t width, double acceleration, double center_fraction,
                            std::uint64_t mask_seed) {
  if (!(acceleration >= 1.0)) throw DomainError("undersample_kspace: acceleration must be >= 1");
  if (!(center_fraction >= 0.0 && center_fraction < 1.0)) {
    throw DomainError("undersample_kspace: center_fraction must lie in [0,1)");
  }
  const auto target = static_cast<std::size_t>(std::ceil(static_cast<double>(width) / acceleration));
  const std::size_t n_center = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(static_cast<double>(width) * center_fraction)), 1, width);

  KspaceMask mask{std::vector<bool>(width, false)};
  // band centred on DC in fftshift order; shifted index s maps to column (s - W/2) mod W
  const std::size_t first = width / 2 - std::min(width / 2, n_center / 2);
  for (std::size_t s = first; s < first + n_center && s < width; ++s) mask.columns[(s + width - width / 2) % width] = true;

  std::vector<std::size_t> rest;
  for (std::size_t c = 0; c < width; ++c)
    if (!mask.columns[c]) rest.push_back(c);
  Rng rng(mask_seed);
  std::shuffle(rest.begin(), rest.end(), rng);
  const std::size_t have = mask.retained();
  const std::size_t extra = target > have ? std::min(target - have, rest.size()) : 0;
  for (std::size_t i = 0; i < extra; ++i) mask.columns[rest[i]] = true;
  return mask;
}

ComplexImage dft2(const ComplexImage& in, std::size_t height, std::size_t width, bool inverse) {
  if (in.size() != height * width) throw DimensionError("dft2: size mismatch");
  const double sign = inverse ? 1.0 : -1.0;
  auto twiddles = [sign](std::size_t n) {
    std::vector<std::complex<double>> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = std::polar(1.0, sign * 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n));
    return t;
  };
  const auto tw_w = twiddles(width);
  const auto tw_h = twiddles(height);

  ComplexImage rows(in.size());
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t k = 0; k < width; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t c = 0; c < width; ++c) acc += in[r * width + c] * tw_w[(k * c) % width];
      rows[r * width + k] = acc;
    }
  ComplexImage out(in.size());
  for (std::size_t c = 0; c < width; ++c)
    for (std::size_t k = 0; k < height; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < height; ++r) acc += rows[r * width + c] * tw_h[(k * r) % height];
      out[k * width + c] = acc;
    }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(height * width);
    for (auto& v : out) v *= scale;
  }
  return out;
}

KspaceUndersampling undersample_kspace_detail(const Tensor& x, double acceleration, double center_fraction,
                                              std::uint64_t mask_seed) {
  require_image(x, "undersample_kspace");
  const std::size_t h = x.dim(1), w = x.dim(2);
  KspaceUndersampling out;
  out.mask = make_column_mask(w, acceleration, center_fraction, mask_seed);

  ComplexImage img(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) img[i] = x[i];
  out.spectrum = dft2(img, h, w, false);
  out.masked = out.spectrum;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      if (!out.mask.columns[c]) out.masked[r * w + c] = 0.0;

  const ComplexImage back = dft2(out.masked, h, w, true);
  out.image = Tensor::image(h, w);
  for (std::size_t i = 0; i < back.size(); ++i) out.image[i] = clamp01(std::abs(back[i]));
  return out;
}

Tensor undersample_kspace(const Tensor& x, double acceleration, double center_fraction, std::uint64_t mask_seed) {
  return undersample_kspace_detail(x, acceleration, center_fraction, mask_seed).image;
}

}  // namespace quantcal
