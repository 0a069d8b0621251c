#include <catch2/catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "truncmean/distributions.hpp"
#include "truncmean/empirical.hpp"
#include "truncmean/error.hpp"

using namespace truncmean;
using Catch::Approx;

namespace {

// Unnormalized densities written directly in x, independent of the library's kernels.
double raw_density(FamilyKind family, double a, double x) {
  switch (family) {
    case FamilyKind::F: return std::cos(std::pow(x, -a)) / (std::pow(x, 1 + a) * (std::sin(std::pow(x, -a)) + 1));
    case FamilyKind::G: return std::pow(x, -(a + 1)) * std::cos(1 / x);
    case FamilyKind::H: return std::pow(x, -a) * std::sin(1 / x);
    case FamilyKind::P: return std::sin(std::pow(x, -(a + 1)));
    case FamilyKind::Q: return std::pow(x, -(a + 1));
  }
  return 0.0;
}

double boost_integral(FamilyKind family, double a, double lo, double hi) {
  auto f = [&](double x) { return raw_density(family, a, x); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

// Integral over [1, inf) through the substitution x = 1/u.
double boost_total(FamilyKind family, double a) {
  auto g = [&](double u) {
    const double v = u <= 0.0 ? 0.0 : raw_density(family, a, 1.0 / u) / (u * u);
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(g, 0.0, 1.0);
}

constexpr FamilyKind kFamilies[] = {FamilyKind::F, FamilyKind::G, FamilyKind::H, FamilyKind::P,
                                    FamilyKind::Q};

}  // namespace

TEST_CASE("Pareto CDF closed form", "[distributions]") {
  const auto m = TailModel::pareto(0.5);
  CHECK(cdf(m, 1.0) == 0.0);
  CHECK(cdf(m, 0.5) == 0.0);
  CHECK(cdf(m, 4.0) == Approx(0.5).epsilon(1e-15));
  CHECK(cdf(m, std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("parameter validation", "[distributions]") {
  CHECK_THROWS_AS(TailModel::pareto(0.0), ParameterError);
  CHECK_THROWS_AS(TailModel::pareto(2.0), ParameterError);
  CHECK_THROWS_AS(TailModel::pareto(0.5, 0.0), ParameterError);
  CHECK_THROWS_AS(TailModel::family(FamilyKind::F, -1.0), ParameterError);
  CHECK_THROWS_AS(family_from_string("z"), ParameterError);
}

TEST_CASE("family CDF at 10 for alpha 0.5 matches frozen high-precision values", "[distributions]") {
  // Arbitrary-precision quadrature of the raw densities.
  const std::pair<FamilyKind, double> expected[] = {
      {FamilyKind::F, 0.55651270121303179}, {FamilyKind::G, 0.65074270939148132},
      {FamilyKind::H, 0.67328468367664426}, {FamilyKind::P, 0.67627622415473414},
      {FamilyKind::Q, 0.68377223398316207}};
  for (const auto& [family, value] : expected) {
    CAPTURE(to_string(family));
    CHECK(cdf(TailModel::family(family, 0.5), 10.0) == Approx(value).margin(1e-8));
  }
}

TEST_CASE("family CDF and normalizing constant agree with Boost quadrature", "[distributions]") {
  for (FamilyKind family : kFamilies) {
    for (double a : {0.3, 0.5, 0.8, 1.2, 1.5}) {
      CAPTURE(to_string(family), a);
      const auto m = TailModel::family(family, a);
      const double total = boost_total(family, a);
      CHECK(m.norm_const() == Approx(1.0 / total).epsilon(1e-8));
      for (double x : {1.5, 10.0, 1e3}) {
        CHECK(m.cdf(x) == Approx(boost_integral(family, a, 1.0, x) / total).margin(1e-8));
      }
    }
  }
}

TEST_CASE("family density integrates to one", "[distributions]") {
  for (FamilyKind family : kFamilies) {
    const auto m = TailModel::family(family, 0.8);
    auto d = [&](double u) {
      const double v = u <= 0.0 ? 0.0 : m.density(1.0 / u) / (u * u);
      return std::isfinite(v) ? v : 0.0;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    CHECK(ts.integrate(d, 0.0, 1.0) == Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("CDF is monotone and bounded on random grids", "[distributions]") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> logx(0.0, 30.0);
  std::vector<TailModel> models = {TailModel::pareto(0.5), TailModel::pareto(1.5, 2.0)};
  for (FamilyKind family : kFamilies) models.push_back(TailModel::family(family, 0.7));
  models.push_back(TailModel::regularly_varying(0.5, {SlowlyVarying::Form::LogPower, 1.0, 1.0, false}, 1.0));
  models.push_back(TailModel::regularly_varying(1.2, {SlowlyVarying::Form::LogPower, 2.0, 0.5, true}, 1.0));
  models.push_back(TailModel::regularly_varying(0.8, {SlowlyVarying::Form::LogLog, 1.0, 1.0, false}, 20.0));
  for (const auto& m : models) {
    std::vector<double> xs(200);
    for (auto& x : xs) x = m.support_min() * std::exp(logx(gen));
    std::sort(xs.begin(), xs.end());
    double prev = 0.0;
    // A regularly varying tail below one at its start leaves an atom at the support minimum.
    const double atom = m.kind() == ModelKind::RegVarying
                            ? 1.0 - std::min(1.0, std::pow(m.tail_start(), -m.alpha()) * (*m.slowly_varying())(m.tail_start()))
                            : 0.0;
    CHECK(m.cdf(m.support_min()) == Approx(atom).margin(1e-12));
    for (double x : xs) {
      const double c = m.cdf(x);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      CHECK(c >= prev - 1e-15);
      prev = c;
    }
  }
}

TEST_CASE("Pareto sampler closed form", "[distributions]") {
  const auto m = TailModel::pareto(0.5);
  CHECK(m.quantile(0.0) == 1.0);
  CHECK(m.quantile(0.75) == Approx(16.0).epsilon(1e-14));
  RngStream rng = rng_substream(1, 0);
  const auto xs = sample(m, rng, 100000);
  CHECK(ks_distance(xs, [&](double x) { return m.cdf(x); }) < 0.01);
  for (double x : xs) REQUIRE(x >= 1.0);
}

TEST_CASE("sampler is deterministic given the stream", "[distributions]") {
  const auto m = TailModel::family(FamilyKind::G, 0.5);
  RngStream a = rng_substream(9, 3);
  RngStream b = rng_substream(9, 3);
  CHECK(sample(m, a, 50) == sample(m, b, 50));
}

TEST_CASE("inverse CDF round trip", "[distributions]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0.0, 0.999999);
  const auto pareto = TailModel::pareto(0.5);
  for (int i = 0; i < 200; ++i) {
    const double u = unif(gen);
    CHECK(pareto.cdf(pareto.quantile(u)) == Approx(u).margin(1e-9));
  }
  for (FamilyKind family : kFamilies) {
    const auto m = TailModel::family(family, 1.2);
    for (int i = 0; i < 100; ++i) {
      const double u = unif(gen);
      CHECK(m.cdf(m.quantile(u)) == Approx(u).margin(1e-6));
    }
  }
  const auto rv = TailModel::regularly_varying(0.5, {SlowlyVarying::Form::LogPower, 1.0, 1.0, false}, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double u = unif(gen);
    const double x = rv.quantile(u);
    if (x > rv.support_min()) CHECK(rv.cdf(x) == Approx(u).margin(1e-6));
  }
}

TEST_CASE("tail sum", "[distributions]") {
  std::vector<TailModel> models(100, TailModel::pareto(0.5));
  CHECK(tail_sum(models, 10.0) == Approx(100.0 / std::sqrt(10.0)).epsilon(1e-14));
  CHECK(tail_sum(models, 1e4) == Approx(1.0).epsilon(1e-14));
  CHECK(tail_sum(models, 1e300) < 1e-140);
  CHECK(tail_sum(models, 100.0) <= tail_sum(models, 50.0));
}

TEST_CASE("regularly varying survival follows x^-alpha L(x)", "[distributions]") {
  const SlowlyVarying sv{SlowlyVarying::Form::LogPower, 1.0, 1.0, true};
  const auto m = TailModel::regularly_varying(0.5, sv, 1.0);
  for (double x : {10.0, 1e3, 1e6}) {
    if (x >= m.tail_start()) CHECK(m.survival(x) == Approx(std::pow(x, -0.5) / std::log1p(x)).epsilon(1e-12));
  }
}

TEST_CASE("slowly varying ratios drift toward one", "[distributions]") {
  const SlowlyVarying forms[] = {{SlowlyVarying::Form::Constant, 3.0, 1.0, false},
                                 {SlowlyVarying::Form::LogPower, 1.0, 1.0, false},
                                 {SlowlyVarying::Form::LogPower, 1.0, 2.0, true},
                                 {SlowlyVarying::Form::LogLog, 1.0, 1.0, false}};
  for (const auto& L : forms) {
    for (double x : {2.0, 10.0}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double t : {1e4, 1e8, 1e16, 1e64, 1e256}) {
        const double gap = std::abs(L(t * x) / L(t) - 1.0);
        CHECK(gap <= prev);
        prev = gap;
      }
      CHECK(prev < 0.01);
    }
  }
  CHECK(forms[0](1e8 * 2) / forms[0](1e8) == 1.0);
  CHECK(forms[1](1e8 * 2) / forms[1](1e8) == Approx(1.0).margin(0.04));
}

TEST_CASE("condition ratios for Pareto", "[distributions]") {
  const auto m = TailModel::pareto(0.5);
  const std::vector<double> grid = {100.0, 1e6};
  const auto report = verify_conditions(m, 1, grid);
  CHECK(report.points[0].ratio == Approx(0.9).epsilon(1e-12));
  CHECK(report.points[1].ratio == Approx(0.999).epsilon(1e-12));
  CHECK(report.converging);
}

TEST_CASE("condition ratios converge for all five families", "[distributions]") {
  std::vector<double> grid;
  for (double b = 1e2; b <= 1e6 * 1.0001; b *= 10.0) grid.push_back(b);
  for (FamilyKind family : kFamilies) {
    for (double a : {0.3, 0.5, 0.8, 1.2, 1.5}) {
      for (int r = 1; r <= 4; ++r) {
        if (r <= a || (a >= 1.0 && r < 2)) continue;
        CAPTURE(to_string(family), a, r);
        const auto report = verify_conditions(TailModel::family(family, a), r, grid);
        CHECK(report.converging);
        CHECK(report.points.back().ratio == Approx(1.0).margin(0.1));
      }
    }
  }
}

TEST_CASE("family q moment matches quadrature", "[distributions]") {
  const auto m = TailModel::family(FamilyKind::Q, 0.5);
  auto f = [&](double x) { return x * x * m.density(x); };
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 1.0, 1e4, 20, 1e-14);
  CHECK(m.truncated_moment(2, 1e4) == Approx(oracle).epsilon(1e-9));
}

TEST_CASE("condition check rejects invalid orders and grids", "[distributions]") {
  const auto m = TailModel::pareto(1.5);
  const std::vector<double> grid = {10.0, 100.0};
  const std::vector<double> bad = {100.0, 10.0};
  CHECK_THROWS_AS(verify_conditions(m, 0, grid), ParameterError);
  CHECK_THROWS_AS(verify_conditions(m, 1, grid), ParameterError);
  CHECK_THROWS_AS(verify_conditions(TailModel::pareto(0.5), 2, bad), ParameterError);
}
