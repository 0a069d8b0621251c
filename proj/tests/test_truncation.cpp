#include <catch2/catch_amalgamated.hpp>

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "truncmean/distributions.hpp"
#include "truncmean/error.hpp"
#include "truncmean/testing.hpp"
#include "truncmean/truncation.hpp"

using namespace truncmean;
using Catch::Approx;

TEST_CASE("truncation values", "[truncation]") {
  CHECK(truncation_value(TruncationRule::log_n(), 1000) == Approx(6.907755278982137).epsilon(1e-15));
  CHECK(truncation_value(TruncationRule::pow(0.5), 10000) == Approx(100.0).epsilon(1e-15));
  CHECK(truncation_value(TruncationRule::pow_over_log1p(2.0), 10) == Approx(100.0 / std::log(11.0)).epsilon(1e-15));
  CHECK(truncation_value(TruncationRule::pow_over_log1p(2.0), 10) == Approx(41.703).epsilon(1e-4));
  CHECK(truncation_value(TruncationRule::pow_over_log(4.0 / 3.0, 10.0), 1000) ==
        Approx(10000.0 / (10.0 * std::log(1000.0))).epsilon(1e-12));
  CHECK(truncation_value(TruncationRule::pow_log1p(2.0, 2.0), 100) ==
        Approx(1e4 * std::pow(std::log(101.0), 2)).epsilon(1e-14));
  CHECK_THROWS_AS(truncation_value(TruncationRule::pow(1.0), 1), DomainError);
}

TEST_CASE("every table rule grows and stays positive", "[truncation]") {
  for (const auto& rule : TruncationRule::table_rules()) {
    const double small = truncation_value(rule, 1000);
    const double large = truncation_value(rule, 1000000);
    CHECK(small > 0.0);
    CHECK(large > small);
  }
  CHECK(TruncationRule::table_rules().size() == 7);
}

TEST_CASE("rule text round trip", "[truncation]") {
  for (const auto& rule : TruncationRule::table_rules()) {
    const auto parsed = parse_rule(to_string(rule));
    for (std::int64_t n : {2, 1000, 123456}) CHECK(truncation_value(parsed, n) == truncation_value(rule, n));
  }
  const auto table = parse_rule("table:10=5,100=50.5");
  CHECK(truncation_value(table, 100) == 50.5);
  CHECK_THROWS_AS(truncation_value(table, 50), DomainError);
  CHECK_THROWS_AS(parse_rule("pow"), ParameterError);
  CHECK_THROWS_AS(parse_rule("pow:-1"), ParameterError);
  CHECK_THROWS_AS(parse_rule("cube:3"), ParameterError);
  CHECK_THROWS_AS(parse_rule("pow_over_log:1"), ParameterError);
}

TEST_CASE("truncated statistics by hand", "[truncation]") {
  const std::vector<double> sample = {1.0, 2.0, 10.0};
  const std::vector<double> mu_k = {1.0, 1.0, 1.0};
  const auto s = truncated_stats(sample, 5.0, mu_k);
  CHECK(s.mu_hat == Approx(1.0).epsilon(1e-15));
  CHECK(s.B_hat == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s.xi_n == Approx(0.0).margin(1e-15));
  CHECK(s.eta_n == Approx((0.0 + 1.0 + 1.0) / 25.0).epsilon(1e-15));
  CHECK_FALSE(s.h_n.has_value());

  const auto all_above = truncated_stats(sample, 0.5, 0.0);
  CHECK(all_above.mu_hat == 0.0);
  CHECK(all_above.B_hat == 0.0);

  const std::vector<double> empty;
  CHECK_THROWS_AS(truncated_stats(empty, 1.0, 0.0), DomainError);
}

TEST_CASE("tail sums attached when a model is given", "[truncation]") {
  const auto model = TailModel::pareto(0.5);
  const std::vector<double> sample(100, 2.0);
  const auto s = truncated_stats(sample, 10.0, 1.0, &model);
  REQUIRE(s.h_n.has_value());
  CHECK(*s.h_n == Approx(100.0 / std::sqrt(10.0)).epsilon(1e-14));
  REQUIRE(s.h_n_m.count(1) == 1);
  CHECK(s.h_n_m.at(1) == Approx(*s.h_n).epsilon(1e-14));  // d(1) = 1 at alpha 1/2
  CHECK(s.h_n_m.at(2) == Approx(*s.h_n / 3.0).epsilon(1e-14));
}

TEST_CASE("truncated mean properties on random data", "[truncation]") {
  std::mt19937_64 gen(3);
  const auto model = TailModel::pareto(0.5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> sample(500);
  for (auto& x : sample) x = model.quantile(unif(gen));
  double prev = -1.0;
  for (double b : {1.5, 3.0, 10.0, 100.0, 1e4, 1e8}) {
    const auto s = truncated_stats(sample, b, 0.0);
    CHECK(s.mu_hat >= prev);
    CHECK(s.mu_hat <= b);
    CHECK(s.B_hat >= 0.0);
    CHECK(s.eta_n >= 0.0);
    prev = s.mu_hat;
    double sum_sq = 0.0;
    for (double x : sample) {
      if (x <= b) sum_sq += x * x;
    }
    const double identity = sum_sq - sample.size() * s.mu_hat * s.mu_hat;
    CHECK(s.B_hat * s.B_hat == Approx(identity).epsilon(1e-9));
  }
  const double top = *std::max_element(sample.begin(), sample.end());
  const auto full = truncated_stats(sample, top, 0.0);
  CHECK(full.mu_hat == Approx(std::accumulate(sample.begin(), sample.end(), 0.0) / sample.size()).epsilon(1e-13));
}

TEST_CASE("truncated mean of Pareto draws near the analytic mean", "[truncation]") {
  const std::int64_t n = 100000;
  RngStream rng = rng_substream(17, 0);
  const auto xs = sample(TailModel::pareto(0.5), rng, n);
  const auto m = pareto_truncated_moments(0.5, static_cast<double>(n));
  const auto s = truncated_stats(xs, static_cast<double>(n), m.mu0);
  const double se = std::sqrt(m.var1 / n);
  CHECK(std::abs(s.mu_hat - m.mu0) < 3.0 * se);
}

TEST_CASE("critical sequence", "[truncation]") {
  const auto pareto = TailModel::pareto(0.5);
  CHECK(critical_sequence(pareto, 10, 1.0) == Approx(100.0).epsilon(1e-12));
  CHECK(critical_sequence(pareto, 100, 4.0) == Approx(625.0).epsilon(1e-12));
  CHECK_THROWS_AS(critical_sequence(pareto, 10, 0.0), DomainError);
  for (std::int64_t n : {10, 1000, 1000000}) {
    const double c = critical_sequence(pareto, n, 2.0);
    CHECK(std::abs(n * pareto.survival(c) - 2.0) <= 1e-6 * 2.0);
  }
}

TEST_CASE("critical sequence for a regularly varying tail", "[truncation]") {
  const SlowlyVarying log_factor{SlowlyVarying::Form::LogPower, 1.0, 1.0, false};
  const auto model = TailModel::regularly_varying(0.5, log_factor, 1.0);
  const double c = critical_sequence(model, 10000, 1.0);
  // Root of x^{1/2} = 1e4 log(1 + x) by 30-digit bisection.
  CHECK(c == Approx(61732773088.266662).epsilon(1e-8));
  // Independent root finder on log x.
  auto f = [](double t) { return std::exp(0.5 * t) - 1e4 * std::log1p(std::exp(t)); };
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::bisect(f, 10.0, 60.0, boost::math::tools::eps_tolerance<double>(50), iters);
  CHECK(c == Approx(std::exp(0.5 * (root.first + root.second))).epsilon(1e-8));
  for (std::int64_t n : {100, 10000, 1000000}) {
    for (double h : {0.5, 1.0, 3.0}) {
      const double x = critical_sequence(model, n, h);
      CHECK(std::abs(n * model.survival(x) - h) <= 1e-4 * h);
    }
  }
}

TEST_CASE("per-observation critical thresholds", "[truncation]") {
  std::vector<TailModel> models;
  for (int k = 0; k < 50; ++k) models.push_back(TailModel::pareto(0.5));
  for (int k = 0; k < 50; ++k) models.push_back(TailModel::family(FamilyKind::Q, 0.5));
  const auto c = critical_sequence(models, 1.0);
  REQUIRE(c.size() == 100);
  CHECK(c.front() == Approx(1e4).epsilon(1e-9));
  CHECK(c.back() == Approx(1e4).epsilon(1e-6));
}

TEST_CASE("regime classification", "[truncation]") {
  const auto model = TailModel::pareto(0.5);
  const std::vector<std::int64_t> grid = {1000, 10000, 100000, 1000000};
  CHECK(classify_rule(TruncationRule::pow(1.0), model, grid) == Regime::SubCritical);
  CHECK(classify_rule(TruncationRule::pow(2.0), model, grid) == Regime::Critical);
  CHECK(classify_rule(TruncationRule::pow_over_log1p(2.0), model, grid) == Regime::SubCritical);
  CHECK(classify_rule(TruncationRule::pow_log1p(2.0, 2.0), model, grid) == Regime::SuperCritical);
  CHECK(classify_rule(TruncationRule::pow(3.0), model, grid) == Regime::SuperCritical);
  for (const auto& rule : TruncationRule::table_rules()) {
    CAPTURE(label(rule));
    CHECK(classify_rule(rule, model, grid) == Regime::SubCritical);
  }
  const auto report = classify_rule_report(TruncationRule::pow(2.0), model, grid);
  for (double h : report.h) CHECK(h == Approx(1.0).epsilon(1e-12));
  CHECK(report.drift_per_decade < 1e-12);
  const std::vector<std::int64_t> short_grid = {10, 100, 1000};
  CHECK_THROWS_AS(classify_rule(TruncationRule::pow(1.0), model, short_grid), DomainError);
}

TEST_CASE("statistics CSV row", "[truncation]") {
  CHECK(stats_csv_header() == "n,b,mu_hat,B_hat,xi_n,eta_n,h_n");
  const std::vector<double> sample = {1.0, 2.0, 10.0};
  const auto s = truncated_stats(sample, 5.0, 1.0);
  CHECK(stats_csv_row(s).rfind("3,5,1,", 0) == 0);
}
