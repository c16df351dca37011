#include "quantcal/datasim/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "quantcal/errors.hpp"
#include "quantcal/numerics/random.hpp"

namespace quantcal {
namespace {

bool tails_ok(const Tensor& img) {
  std::size_t high = 0, low = 0;
  for (double v : img.data()) {
    high += v > 0.8;
    low += v < 0.2;
  }
  const double n = static_cast<double>(img.size());
  return static_cast<double>(high) >= 0.1 * n && static_cast<double>(low) >= 0.1 * n;
}

double kth_value(std::vector<double> v, double frac) {
  const auto k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

Tensor compose(Rng& rng, std::size_t height, std::size_t width) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * u01(rng); };

  const double h = static_cast<double>(height), w = static_cast<double>(width);
  Tensor img = Tensor::image(height, width);

  const double base = uni(0.0, 0.3), gx = uni(-0.2, 0.2), gy = uni(-0.2, 0.2);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c)
      img.at(0, r, c) = base + gx * (static_cast<double>(c) / w) + gy * (static_cast<double>(r) / h);

  const int n_ellipses = 3 + static_cast<int>(u01(rng) * 4.0);
  for (int e = 0; e < n_ellipses; ++e) {
    const double cy = uni(0.15, 0.85) * h, cx = uni(0.15, 0.85) * w;
    const double ay = uni(0.08, 0.3) * h, ax = uni(0.08, 0.3) * w;
    const double theta = uni(0.0, M_PI);
    // the first ellipse is always bright so both tails get populated
    const double level = e == 0 ? uni(0.85, 1.0) : uni(0.0, 1.0);
    const double slope = uni(-0.15, 0.15);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < width; ++c) {
        const double dy = static_cast<double>(r) - cy, dx = static_cast<double>(c) - cx;
        const double u = (dx * ct + dy * st) / ax, v = (-dx * st + dy * ct) / ay;
        if (u * u + v * v <= 1.0) img.at(0, r, c) = level + slope * u;
      }
  }

  const int n_bars = 1 + static_cast<int>(u01(rng) * 3.0);
  for (int b = 0; b < n_bars; ++b) {
    const bool vertical = u01(rng) < 0.5;
    const double level = uni(0.0, 1.0);
    const auto len = static_cast<std::size_t>(uni(0.3, 0.7) * (vertical ? h : w));
    const auto thick = std::max<std::size_t>(1, static_cast<std::size_t>(uni(0.03, 0.08) * (vertical ? w : h)));
    const auto r0 = static_cast<std::size_t>(uni(0.05, 0.6) * h);
    const auto c0 = static_cast<std::size_t>(uni(0.05, 0.6) * w);
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < thick; ++j) {
        const std::size_t r = vertical ? r0 + i : r0 + j;
        const std::size_t c = vertical ? c0 + j : c0 + i;
        if (r < height && c < width) img.at(0, r, c) = level;
      }
  }

  // contrast stretch: 10th percentile -> 0.15, 90th -> 0.85
  const std::vector<double>& vals = img.values();
  double lo = kth_value(vals, 0.10), hi = kth_value(vals, 0.90);
  if (hi - lo < 1e-3) {
    lo = img.min();
    hi = img.max();
  }
  if (hi - lo < 1e-3) return img;
  for (auto& v : img.data()) v = std::clamp(0.15 + (v - lo) * (0.7 / (hi - lo)), 0.0, 1.0);
  return img;
}

}  // namespace

Tensor gen_phantom(std::uint64_t seed, std::size_t height, std::size_t width) {
  if (height < 16 || width < 16) throw DomainError("gen_phantom: image must be at least 16x16");
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    Tensor img = compose(rng, height, width);
    for (auto& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    if (tails_ok(img)) return img;
  }
  throw Error("gen_phantom: could not satisfy the intensity-tail constraint");
}

}  // namespace quantcal
