#pragma once

namespace truncmean {

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x);
/// Phi^{-1}(p) to full double precision (AS241 plus one Newton step).
double normal_quantile(double p);

/// Standard Levy law, density (2 pi x^3)^{-1/2} exp(-1/(2x)) on x > 0, scaled by `scale`.
double levy_pdf(double x, double scale = 1.0);
double levy_cdf(double x, double scale = 1.0);
double levy_sf(double x, double scale = 1.0);
/// Levy quantile by bisection on log x against the closed-form CDF.
double levy_quantile(double p, double scale = 1.0);

}  // namespace truncmean
