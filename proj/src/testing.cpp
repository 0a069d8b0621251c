#include "truncmean/testing.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "truncmean/error.hpp"
#include "truncmean/special.hpp"

namespace truncmean {

std::string to_string(VarianceMode mode) {
  return mode == VarianceMode::Known ? "known" : "estimated";
}

VarianceMode variance_mode_from_string(const std::string& text) {
  if (text == "known") return VarianceMode::Known;
  if (text == "estimated") return VarianceMode::Estimated;
  throw ParameterError("variance mode must be 'known' or 'estimated', got '" + text + "'");
}

std::string to_string(StableScale scale) {
  return scale == StableScale::Standard ? "standard" : "pareto_limit";
}

StableScale stable_scale_from_string(const std::string& text) {
  if (text == "standard") return StableScale::Standard;
  if (text == "pareto_limit") return StableScale::ParetoLimit;
  throw ParameterError("stable scale must be 'standard' or 'pareto_limit', got '" + text + "'");
}

double statistic_T(const TruncatedStats& stats, double mu0) {
  if (!(stats.B_hat > 0.0)) {
    throw DegenerateSampleError("statistic_T: all truncated values are identical");
  }
  return static_cast<double>(stats.n) * (stats.mu_hat - mu0) / stats.B_hat;
}

double statistic_To(const TruncatedStats& stats, double mu0, double var_total) {
  if (!(var_total > 0.0)) throw ParameterError("statistic_To: total variance must be positive");
  return static_cast<double>(stats.n) * (stats.mu_hat - mu0) / std::sqrt(var_total);
}

ParetoMoments pareto_truncated_moments(double alpha0, double b) {
  if (!(alpha0 > 0.0 && alpha0 < 2.0)) throw ParameterError("alpha0 must lie in (0, 2)");
  if (!(b >= 1.0)) throw DomainError("pareto_truncated_moments: b must be at least 1");
  const double log_b = std::log(b);
  // alpha/(k) (b^k - 1) written as alpha * expm1(k log b) / k; k -> 0 gives alpha log b.
  const auto power_integral = [&](double k) {
    if (std::abs(k) < 1e-8) {
      const double kl = k * log_b;
      return alpha0 * log_b * (1.0 + kl / 2.0 + kl * kl / 6.0);
    }
    return alpha0 * std::expm1(k * log_b) / k;
  };
  ParetoMoments m;
  m.mu0 = power_integral(1.0 - alpha0);
  const double second = power_integral(2.0 - alpha0);
  m.var1 = std::max(0.0, second - m.mu0 * m.mu0);
  return m;
}

double z_quantile(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  return normal_quantile(1.0 - beta / 2.0);
}

RejectionRegion rejection_region(const TestConfig& config, std::int64_t n, double mu0,
                                 double scale) {
  if (n < 1) throw DomainError("rejection_region: n must be positive");
  const double half_width = z_quantile(config.beta) * scale / static_cast<double>(n);
  return {mu0 - half_width, mu0 + half_width};
}

StableRegion rejection_region_stable(std::int64_t n, double beta, StableScale scale) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  StableRegion r;
  r.levy_quantile = levy_quantile(1.0 - beta);
  const double factor = scale == StableScale::ParetoLimit ? std::numbers::pi / 2.0 : 1.0;
  r.threshold = static_cast<double>(n) * factor * r.levy_quantile;
  return r;
}

ConfidenceInterval confidence_interval(const TruncatedStats& stats, double x) {
  if (!(x > 0.0)) throw ParameterError("confidence_interval: x must be positive");
  const double half = x * stats.B_hat / static_cast<double>(stats.n);
  return {stats.mu_hat - half, stats.mu_hat + half, 2.0 * normal_cdf(x) - 1.0};
}

TestOutcome run_test(std::span<const double> sample, const TestConfig& config) {
  if (sample.empty()) throw DomainError("run_test: empty sample");
  if (!(config.beta > 0.0 && config.beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  const auto n = static_cast<std::int64_t>(sample.size());
  const double b = truncation_value(config.rule, n);
  const TailModel h0 = TailModel::pareto(config.alpha0);

  TestOutcome out;
  out.n = n;
  out.b = b;
  out.variance_mode = config.variance_mode;
  // Moments are evaluated only after the sample is known to be nondegenerate.
  TruncatedStats stats = truncated_stats(sample, b, 0.0, &h0);
  if (!(stats.B_hat > 0.0)) {
    throw DegenerateSampleError("run_test: all truncated values are identical");
  }
  const ParetoMoments moments = pareto_truncated_moments(config.alpha0, b);
  out.mu0 = moments.mu0;
  out.var1 = moments.var1;
  out.mu_hat = stats.mu_hat;
  out.B_hat = stats.B_hat;

  double scale = 0.0;
  if (config.variance_mode == VarianceMode::Known) {
    const double var_total = static_cast<double>(n) * moments.var1;
    out.statistic = statistic_To(stats, moments.mu0, var_total);
    scale = std::sqrt(var_total);
  } else {
    out.statistic = statistic_T(stats, moments.mu0);
    scale = stats.B_hat;
  }
  out.z_quantile = z_quantile(config.beta);
  out.region = rejection_region(config, n, moments.mu0, scale);
  out.reject = out.region.contains(stats.mu_hat);
  out.p_value = std::erfc(std::abs(out.statistic) / std::numbers::sqrt2);

  constexpr std::array<std::int64_t, 4> grid = {1000, 10000, 100000, 1000000};
  if (config.rule.kind == TruncationRule::Kind::Table) {
    out.regime = Regime::Inconclusive;
  } else {
    out.regime = classify_rule(config.rule, h0, grid);
  }
  return out;
}

}  // namespace truncmean
