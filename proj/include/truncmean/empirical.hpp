#pragma once

#include <functional>
#include <span>

namespace truncmean {

/// sup_x |F_n(x) - cdf(x)| for the empirical CDF of `sample`.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);
/// sup_x |F_n(x) - G_m(x)| between two empirical CDFs.
double ks_distance_two_sample(std::span<const double> a, std::span<const double> b);

/// Sample quantile with linear interpolation between order statistics (type 7).
double sample_quantile(std::span<const double> sample, double p);
double median(std::span<const double> sample);
double interquartile_range(std::span<const double> sample);

}  // namespace truncmean
