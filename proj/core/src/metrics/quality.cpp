#include "quantcal/metrics/quality.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "quantcal/errors.hpp"

namespace quantcal {

namespace {

constexpr int kWin = 7;
constexpr double kSigma = 1.5;

std::array<double, kWin * kWin> gaussian_window() {
  std::array<double, kWin * kWin> w{};
  double total = 0.0;
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) {
      const double di = i - kWin / 2;
      const double dj = j - kWin / 2;
      w[i * kWin + j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
      total += w[i * kWin + j];
    }
  for (auto& v : w) v /= total;
  return w;
}

std::pair<std::size_t, std::size_t> plane_dims(const Tensor& t) {
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  if (t.rank() == 3 && t.dim(0) == 1) return {t.dim(1), t.dim(2)};
  throw DimensionError("ssim: expected [H,W] or [1,H,W], got " + shape_string(t.shape()));
}

}  // namespace

double mse(const Tensor& estimate, const Tensor& truth) {
  require_same_shape(estimate, truth, "mse");
  if (truth.size() == 0) throw DimensionError("mse: empty tensor");
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    acc += d * d;
  }
  return acc / static_cast<double>(truth.size());
}

double psnr_from_mse(double m) {
  if (m <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double ssim(const Tensor& estimate, const Tensor& truth) {
  require_same_shape(estimate, truth, "ssim");
  const auto [h, w] = plane_dims(truth);
  if (h < kWin || w < kWin) throw DimensionError("ssim: image smaller than the 7x7 window");
  static const auto win = gaussian_window();
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + kWin <= h; ++r) {
    for (std::size_t c = 0; c + kWin <= w; ++c) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const double wt = win[i * kWin + j];
          const std::size_t p = (r + i) * w + c + j;
          const double a = estimate[p];
          const double b = truth[p];
          mx += wt * a;
          my += wt * b;
          sxx += wt * a * a;
          syy += wt * b * b;
          sxy += wt * a * b;
        }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cov = sxy - mx * my;
      acc += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

ImageQuality image_quality(const Tensor& estimate, const Tensor& truth) {
  const double m = mse(estimate, truth);
  return {m, psnr_from_mse(m), ssim(estimate, truth)};
}

}  // namespace quantcal
