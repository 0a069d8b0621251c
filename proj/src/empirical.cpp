#include "truncmean/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "truncmean/error.hpp"

namespace truncmean {

namespace {

std::vector<double> sorted_copy(std::span<const double> sample) {
  std::vector<double> v(sample.begin(), sample.end());
  for (double x : v) {
    if (std::isnan(x)) throw DomainError("empirical: sample contains NaN");
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_distance: empty sample");
  const auto v = sorted_copy(sample);
  const double n = static_cast<double>(v.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;  // ties jump together
    const double f = cdf(v[i]);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n),
                      std::abs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return worst;
}

double ks_distance_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_distance_two_sample: empty sample");
  const auto x = sorted_copy(a);
  const auto y = sorted_copy(b);
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return worst;
}

double sample_quantile(std::span<const double> sample, double p) {
  if (sample.empty()) throw DomainError("sample_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sample_quantile: p must lie in [0, 1]");
  const auto v = sorted_copy(sample);
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::span<const double> sample) { return sample_quantile(sample, 0.5); }

double interquartile_range(std::span<const double> sample) {
  return sample_quantile(sample, 0.75) - sample_quantile(sample, 0.25);
}

}  // namespace truncmean
