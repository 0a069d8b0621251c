#include "truncmean/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "truncmean/error.hpp"

namespace truncmean {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0 ? -value : value;
}

}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("normal_quantile: p must lie in [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  double x = ppnd16(p);
  // One Newton step, on the upper tail when p > 1/2 (1 - p is exact there).
  const double pdf = normal_pdf(x);
  if (pdf > 0.0) {
    if (p < 0.5) {
      x -= (normal_cdf(x) - p) / pdf;
    } else {
      x += (normal_sf(x) - (1.0 - p)) / pdf;
    }
  }
  return x;
}

double levy_pdf(double x, double scale) {
  if (x <= 0.0) return 0.0;
  const double z = x / scale;
  return std::exp(-0.5 / z) / std::sqrt(2.0 * std::numbers::pi * z * z * z) / scale;
}

double levy_cdf(double x, double scale) {
  if (x <= 0.0) return 0.0;
  return std::erfc(std::sqrt(0.5 * scale / x));
}

double levy_sf(double x, double scale) {
  if (x <= 0.0) return 1.0;
  return std::erf(std::sqrt(0.5 * scale / x));
}

double levy_quantile(double p, double scale) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("levy_quantile: p must lie in [0, 1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  // F(x) = erfc(sqrt(1 / (2x))) is increasing; work on log x.
  double lo = -10.0;
  double hi = 10.0;
  while (levy_cdf(std::exp(lo)) > p) lo *= 2.0;
  while (levy_cdf(std::exp(hi)) < p) {
    hi *= 2.0;
    if (hi > 700.0) return std::numeric_limits<double>::infinity();
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (levy_cdf(std::exp(mid)) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return scale * std::exp(0.5 * (lo + hi));
}

}  // namespace truncmean
