#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "truncmean/distributions.hpp"
#include "truncmean/empirical.hpp"
#include "truncmean/error.hpp"
#include "truncmean/rng.hpp"
#include "truncmean/special.hpp"
#include "truncmean/testing.hpp"

using namespace truncmean;
using Catch::Approx;

namespace {

std::vector<double> pareto_draws(std::uint64_t seed, std::uint64_t rep, std::int64_t n, double alpha = 0.5) {
  RngStream rng = rng_substream(seed, rep);
  return sample(TailModel::pareto(alpha), rng, static_cast<std::size_t>(n));
}

}  // namespace

TEST_CASE("statistic T", "[testing]") {
  const std::vector<double> sample = {1.0, 2.0, 10.0};
  const auto s = truncated_stats(sample, 5.0, 1.0);
  CHECK(statistic_T(s, s.mu_hat) == 0.0);
  CHECK(statistic_T(s, 1.0) == Approx(0.0).margin(1e-15));
  CHECK(statistic_T(s, 0.5) == Approx(3.0 * 0.5 / std::sqrt(2.0)).epsilon(1e-14));
  const auto degenerate = truncated_stats(sample, 0.5, 0.0);
  CHECK_THROWS_AS(statistic_T(degenerate, 0.0), DegenerateSampleError);
}

TEST_CASE("statistic T is permutation invariant", "[testing]") {
  auto xs = pareto_draws(5, 0, 1000);
  const auto m = pareto_truncated_moments(0.5, 1000.0);
  const double t = statistic_T(truncated_stats(xs, 1000.0, m.mu0), m.mu0);
  std::mt19937_64 gen(1);
  std::shuffle(xs.begin(), xs.end(), gen);
  CHECK(statistic_T(truncated_stats(xs, 1000.0, m.mu0), m.mu0) == Approx(t).epsilon(1e-12));
}

TEST_CASE("statistic T with known variance", "[testing]") {
  TruncatedStats s;
  s.n = 100;
  s.mu_hat = 1.1;
  CHECK(statistic_To(s, 1.1, 4.0) == 0.0);
  CHECK(statistic_To(s, 1.0, 400.0) == Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(statistic_To(s, 1.0, 0.0), ParameterError);
}

TEST_CASE("Pareto truncated moments", "[testing]") {
  auto m = pareto_truncated_moments(0.5, 4.0);
  CHECK(m.mu0 == Approx(1.0).epsilon(1e-14));
  CHECK(m.var1 == Approx(4.0 / 3.0).epsilon(1e-14));
  m = pareto_truncated_moments(0.5, 1.0);
  CHECK(m.mu0 == 0.0);
  CHECK(m.var1 == 0.0);
  CHECK(pareto_truncated_moments(1.0, std::exp(2.0)).mu0 == Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(pareto_truncated_moments(0.5, 0.9), DomainError);
}

TEST_CASE("Pareto moments agree with quadrature", "[testing]") {
  for (double a : {0.3, 0.5, 0.99999999, 1.0, 1.2, 1.7}) {
    for (double b : {2.0, 10.0, 1e3}) {
      auto m1 = [a](double x) { return x * a * std::pow(x, -a - 1); };
      auto m2 = [a](double x) { return x * x * a * std::pow(x, -a - 1); };
      using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
      const double e1 = GK::integrate(m1, 1.0, b, 15, 1e-14);
      const double e2 = GK::integrate(m2, 1.0, b, 15, 1e-14);
      const auto m = pareto_truncated_moments(a, b);
      CAPTURE(a, b);
      CHECK(m.mu0 == Approx(e1).epsilon(1e-10));
      CHECK(m.var1 == Approx(e2 - e1 * e1).epsilon(1e-9));
    }
  }
}

TEST_CASE("moments are continuous across alpha 1 and the variance is nonnegative", "[testing]") {
  for (double b : {2.0, 10.0, 1e3}) {
    const auto at = pareto_truncated_moments(1.0, b);
    for (double eps : {1e-7, 1e-9, 1e-12}) {
      CHECK(pareto_truncated_moments(1.0 - eps, b).mu0 == Approx(at.mu0).epsilon(1e-6));
      CHECK(pareto_truncated_moments(1.0 + eps, b).mu0 == Approx(at.mu0).epsilon(1e-6));
      CHECK(pareto_truncated_moments(1.0 + eps, b).var1 == Approx(at.var1).epsilon(1e-6));
    }
  }
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> alpha(0.01, 1.99);
  std::uniform_real_distribution<double> logb(0.0, 40.0);
  for (int i = 0; i < 1000; ++i) CHECK(pareto_truncated_moments(alpha(gen), std::exp(logb(gen))).var1 >= 0.0);
}

TEST_CASE("normal quantile of the rejection region", "[testing]") {
  const boost::math::normal_distribution<double> normal;
  CHECK(z_quantile(0.05) == Approx(1.959964).margin(1e-6));
  for (double beta : {0.001, 0.01, 0.05, 0.1, 0.5, 0.9}) {
    CHECK(z_quantile(beta) == Approx(boost::math::quantile(normal, 1.0 - beta / 2.0)).epsilon(1e-13));
  }
}

TEST_CASE("rejection region", "[testing]") {
  TestConfig config;
  const auto region = rejection_region(config, 100, 1.0, 20.0);
  CHECK(region.lower_cut == Approx(1.0 - 0.392).margin(1e-4));
  CHECK(region.upper_cut == Approx(1.0 + 0.392).margin(1e-4));
  CHECK(region.contains(0.5));
  CHECK_FALSE(region.contains(1.0));
  config.beta = 1.0 - 1e-12;
  const auto wide = rejection_region(config, 100, 1.0, 20.0);
  CHECK(wide.contains(1.0 + 1e-6));
  CHECK(wide.contains(1.0 - 1e-6));
  CHECK_FALSE(wide.contains(1.0));
}

TEST_CASE("region membership matches the statistic threshold", "[testing]") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TestConfig config;
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    TruncatedStats s;
    s.n = 10 + static_cast<std::int64_t>(1000 * unif(gen));
    s.B_hat = 0.1 + 10 * unif(gen);
    const double mu0 = 5 * unif(gen);
    s.mu_hat = mu0 + (unif(gen) - 0.5) * 4.0 * s.B_hat / s.n;
    config.beta = 0.01 + 0.2 * unif(gen);
    const auto region = rejection_region(config, s.n, mu0, s.B_hat);
    const bool by_region = region.contains(s.mu_hat);
    const bool by_statistic = std::abs(statistic_T(s, mu0)) > z_quantile(config.beta);
    if (by_region != by_statistic) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("stable rejection region", "[testing]") {
  const auto r95 = rejection_region_stable(1, 0.05);
  CHECK(r95.levy_quantile == Approx(254.31444455055901).epsilon(1e-9));
  CHECK(std::abs(r95.levy_quantile - 254.6) < 0.5);
  CHECK(rejection_region_stable(1, 0.5).levy_quantile == Approx(2.1981093383177324).epsilon(1e-9));
  const auto r = rejection_region_stable(1000, 0.05);
  CHECK(r.threshold == Approx(2.5431e5).epsilon(1e-4));
  CHECK(r.contains(3e5));
  CHECK_FALSE(r.contains(2e5));
  const auto pl = rejection_region_stable(1000, 0.05, StableScale::ParetoLimit);
  CHECK(pl.threshold == Approx(r.threshold * std::acos(-1.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("confidence interval", "[testing]") {
  TruncatedStats s;
  s.n = 100;
  s.mu_hat = 2.0;
  s.B_hat = 10.0;
  const auto ci = confidence_interval(s, 1.96);
  CHECK(ci.coverage == Approx(0.95).margin(1e-4));
  CHECK(ci.lo == Approx(2.0 - 0.196).epsilon(1e-14));
  CHECK(ci.hi == Approx(2.0 + 0.196).epsilon(1e-14));
  s.B_hat = 0.0;
  const auto zero = confidence_interval(s, 1.96);
  CHECK(zero.lo == 2.0);
  CHECK(zero.hi == 2.0);
}

TEST_CASE("run_test outcomes", "[testing]") {
  const std::vector<double> ones(10, 1.0);
  TestConfig config;
  config.rule = TruncationRule::from_table({{10, 0.5}});
  CHECK_THROWS_AS(run_test(ones, config), DegenerateSampleError);

  const auto xs = pareto_draws(42, 0, 10000);
  config.rule = TruncationRule::pow(0.5);
  const auto outcome = run_test(xs, config);
  CHECK(outcome.b == Approx(100.0).epsilon(1e-14));
  CHECK(outcome.mu0 == Approx(9.0).epsilon(1e-14));
  CHECK(outcome.reject == (std::abs(outcome.statistic) > outcome.z_quantile));
  CHECK(outcome.p_value == Approx(std::erfc(std::abs(outcome.statistic) / std::sqrt(2.0))).epsilon(1e-14));
  CHECK(outcome.regime == Regime::SubCritical);

  config.beta = 0.9999;
  const auto loose = run_test(xs, config);
  REQUIRE(loose.mu_hat != loose.mu0);
  CHECK(loose.reject);

  const auto heavier = pareto_draws(42, 1, 10000, 0.8);
  config.beta = 0.05;
  config.rule = TruncationRule::pow(1.0);
  CHECK(run_test(heavier, config).reject);
}

TEST_CASE("T stays bounded under the hypothesis", "[testing][mc]") {
  const std::int64_t n = 100000;
  const auto m = pareto_truncated_moments(0.5, static_cast<double>(n));
  int inside = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto xs = pareto_draws(101, rep, n);
    if (std::abs(statistic_T(truncated_stats(xs, static_cast<double>(n), m.mu0), m.mu0)) < 4.0) ++inside;
  }
  CHECK(inside >= 999);
}

TEST_CASE("known-variance rejection rate and interval coverage", "[testing][mc]") {
  const std::int64_t n = 10000;
  const double b = std::sqrt(static_cast<double>(n));
  const auto m = pareto_truncated_moments(0.5, b);
  const double z = z_quantile(0.05);
  const double full_b = static_cast<double>(n);
  const auto mf = pareto_truncated_moments(0.5, full_b);
  int rejections = 0;
  int covered = 0;
  std::vector<double> t_values;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    const auto xs = pareto_draws(202, rep, n);
    const auto s = truncated_stats(xs, b, m.mu0);
    if (std::abs(statistic_To(s, m.mu0, n * m.var1)) > z) ++rejections;
    const auto sf = truncated_stats(xs, full_b, mf.mu0);
    const auto ci = confidence_interval(sf, z);
    if (mf.mu0 >= ci.lo && mf.mu0 <= ci.hi) ++covered;
    const auto sl = truncated_stats(xs, std::log(full_b), 0.0);
    const double mu_log = pareto_truncated_moments(0.5, std::log(full_b)).mu0;
    t_values.push_back(statistic_T(sl, mu_log));
  }
  CHECK(std::abs(static_cast<double>(rejections) / reps - 0.0488) <= 0.01);
  CHECK(std::abs(static_cast<double>(covered) / reps - 0.95) <= 0.01);
  CHECK(ks_distance(t_values, normal_cdf) <= 0.02);
}
