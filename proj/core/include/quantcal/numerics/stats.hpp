#pragma once

#include <span>

namespace quantcal {

/// Inverse standard-normal CDF.
double normal_quantile(double p);
double normal_cdf(double z);
double normal_pdf(double x, double mean = 0.0, double sigma = 1.0);

double mean_of(std::span<const double> v);
/// Population standard deviation (divides by n).
double stddev_of(std::span<const double> v);
/// Linear-interpolated percentile, p in [0,100].
double percentile_of(std::span<const double> v, double p);

}  // namespace quantcal
