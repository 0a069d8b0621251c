#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "truncmean/truncation.hpp"

namespace truncmean {

enum class VarianceMode { Known, Estimated };
std::string to_string(VarianceMode mode);
VarianceMode variance_mode_from_string(const std::string& text);

/// Scale attached to the stable-law threshold for the untruncated mean.
///  Standard:     y is the upper-beta quantile of the standard Levy law.
///  ParetoLimit:  y is scaled by pi/2, the scale of the Levy limit of sum X_k / n^2
///                for Pareto(1/2) data with 1 - F(x) = x^{-1/2}.
enum class StableScale { Standard, ParetoLimit };
std::string to_string(StableScale scale);
StableScale stable_scale_from_string(const std::string& text);

struct TestConfig {
  double alpha0 = 0.5;
  double beta = 0.05;
  VarianceMode variance_mode = VarianceMode::Estimated;
  TruncationRule rule = TruncationRule::log_n();
};

/// Two-sided region (-inf, lower_cut) U (upper_cut, inf); the cut points themselves accept.
struct RejectionRegion {
  double lower_cut = 0.0;
  double upper_cut = 0.0;
  bool contains(double x) const { return x < lower_cut || x > upper_cut; }
};

/// One-sided region (threshold, inf).
struct StableRegion {
  double threshold = 0.0;
  double levy_quantile = 0.0;  // y with threshold = n * y
  bool contains(double x) const { return x > threshold; }
};

struct TestOutcome {
  double statistic = 0.0;
  double mu0 = 0.0;
  double var1 = 0.0;  // Var X_1(b) under the hypothesis
  RejectionRegion region;
  bool reject = false;
  double z_quantile = 0.0;
  double p_value = 1.0;  // two-sided normal approximation, meaningful when SubCritical
  Regime regime = Regime::Inconclusive;
  std::int64_t n = 0;
  double b = 0.0;
  double mu_hat = 0.0;
  double B_hat = 0.0;
  VarianceMode variance_mode = VarianceMode::Estimated;
};

/// n (mu_hat - mu0) / B_hat.
double statistic_T(const TruncatedStats& stats, double mu0);
/// n (mu_hat - mu0) / sqrt(var_total), var_total = sum_k Var X_k(b).
double statistic_To(const TruncatedStats& stats, double mu0, double var_total);

struct ParetoMoments {
  double mu0 = 0.0;   // E X 1{X <= b}
  double var1 = 0.0;  // Var X 1{X <= b}
};

/// Moments of X 1{X <= b} for 1 - F(x) = x^{-alpha0} on [1, inf).
ParetoMoments pareto_truncated_moments(double alpha0, double b);

/// Phi^{-1}(1 - beta/2).
double z_quantile(double beta);

RejectionRegion rejection_region(const TestConfig& config, std::int64_t n, double mu0, double scale);
StableRegion rejection_region_stable(std::int64_t n, double beta,
                                     StableScale scale = StableScale::Standard);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double coverage = 0.0;  // 2 Phi(x) - 1
};

ConfidenceInterval confidence_interval(const TruncatedStats& stats, double x);

/// Full test of H0: tail index alpha0 for Pareto data on [1, inf).
TestOutcome run_test(std::span<const double> sample, const TestConfig& config);

}  // namespace truncmean
