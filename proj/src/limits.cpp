#include "truncmean/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "truncmean/error.hpp"
#include "truncmean/quadrature.hpp"
#include "truncmean/special.hpp"

namespace truncmean {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Beyond this point the oscillatory parts use their asymptotic expansions.
constexpr double kAsymptoticStart = 32.0;

// Series on [0, u], u <= 1: sums over j of (+-) u^{j-a} / (j! (j - a)).
OscIntegrals head_series(double u, double a) {
  OscIntegrals out;
  if (u <= 0.0) return out;
  double power = 1.0;  // u^j / j!
  double smx = 0.0;
  double omc = 0.0;
  double sn = 0.0;
  for (int j = 1; j <= 30; ++j) {
    power *= u / j;
    const double term = power / (j - a);
    if (j % 2 == 1) {
      const double sign = ((j - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
      sn += sign * term;
      if (j >= 3) smx += sign * term;
    } else {
      const double sign = (j / 2) % 2 == 1 ? 1.0 : -1.0;
      omc += sign * term;
    }
    if (power < 1e-22) break;
  }
  const double scale = std::pow(u, -a);
  out.sin_minus_x = smx * scale;
  out.one_minus_cos = omc * scale;
  out.sin = a < 1.0 ? sn * scale : kNaN;
  return out;
}

// int_x^inf e^{iu} u^{-b} du ~ i e^{ix} x^{-b} sum_m (b)_m (-i/x)^m, x >= kAsymptoticStart.
cplx exp_tail(double x, double b) {
  cplx sum = 0.0;
  cplx factor = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 200; ++m) {
    const double size = std::abs(factor);
    if (size > previous || size < 1e-18) break;
    sum += factor;
    previous = size;
    factor *= cplx(0.0, -(b + m) / x);
  }
  return cplx(0.0, 1.0) * std::polar(std::pow(x, -b), x) * sum;
}

// int_1^t e^{ix} x^{-b} dx.
cplx exp_body(double t, double b) {
  const QuadOptions opts{1e-15, 1e-14, 2000};
  const auto integrate_part = [&](double hi) {
    const double s = integrate([b](double x) { return std::sin(x) * std::pow(x, -b); }, 1.0, hi, opts).value;
    const double c = integrate([b](double x) { return std::cos(x) * std::pow(x, -b); }, 1.0, hi, opts).value;
    return cplx(c, s);
  };
  if (t <= kAsymptoticStart) return integrate_part(t);
  // Cache the fixed piece on [1, kAsymptoticStart] per exponent.
  thread_local double cached_b = kNaN;
  thread_local cplx cached_value;
  if (!(cached_b == b)) {
    cached_value = integrate_part(kAsymptoticStart) + exp_tail(kAsymptoticStart, b);
    cached_b = b;
  }
  return cached_value - exp_tail(t, b);
}

// (t^k - 1) / k, continuous at k = 0.
double power_integral(double k, double log_t) {
  const double kl = k * log_t;
  if (std::abs(kl) < 1e-300) return log_t;
  return std::expm1(kl) / k;
}

void check_index(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError(std::string(what) + ": alpha must lie in (0, 2)");
}

double sign_of(double t) { return t < 0.0 ? -1.0 : 1.0; }

}  // namespace

OscIntegrals osc_integrals(double t, double a) {
  if (!(t >= 0.0)) throw DomainError("osc_integrals: t must be nonnegative");
  if (!(a > 0.0 && a < 2.0)) throw ParameterError("osc_integrals: exponent must lie in (0, 2)");
  if (t <= 1.0) return head_series(t, a);
  OscIntegrals out = head_series(1.0, a);
  const cplx body = exp_body(t, 1.0 + a);
  const double log_t = std::log(t);
  out.sin_minus_x += body.imag() - power_integral(1.0 - a, log_t);
  out.one_minus_cos += power_integral(-a, log_t) - body.real();
  if (a < 1.0) out.sin += body.imag();
  return out;
}

double one_minus_cos_limit(double a) {
  if (!(a > 0.0 && a < 2.0)) throw ParameterError("one_minus_cos_limit: exponent must lie in (0, 2)");
  return kPi / (2.0 * std::tgamma(1.0 + a) * std::sin(kPi * a / 2.0));
}

double sin_limit(double a) {
  if (!(a > 0.0 && a < 1.0)) throw ParameterError("sin_limit: exponent must lie in (0, 1)");
  return std::tgamma(1.0 - a) * std::sin(kPi * a / 2.0) / a;
}

LimitLaw LimitLaw::xi(double alpha, double h) {
  LimitLaw law{Kind::Xi, alpha, h};
  validate(law);
  return law;
}

LimitLaw LimitLaw::eta(double alpha, double h) {
  LimitLaw law{Kind::Eta, alpha, h};
  validate(law);
  return law;
}

LimitLaw LimitLaw::talphah(double alpha, double h) {
  LimitLaw law{Kind::Talphah, alpha, h};
  validate(law);
  return law;
}

LimitLaw LimitLaw::stable_skew_neg(double alpha) {
  LimitLaw law{Kind::StableSkewNeg, alpha, 1.0};
  validate(law);
  return law;
}

LimitLaw LimitLaw::stable_half_skew_pos(double alpha) {
  LimitLaw law{Kind::StableHalfSkewPos, alpha, 1.0};
  validate(law);
  return law;
}

double LimitLaw::sigma() const { return std::sqrt(alpha / (2.0 - alpha)); }

double stable_c1(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw ParameterError("c1 needs alpha in (1, 2)");
  return std::tgamma(2.0 - alpha) * std::abs(std::cos(alpha * kPi / 2.0)) / (alpha - 1.0);
}

double stable_c2(double alpha) {
  check_index(alpha, "c2");
  return 2.0 * std::tgamma(1.0 - alpha / 2.0) * std::cos(alpha * kPi / 4.0);
}

void validate(const LimitLaw& law) {
  using K = LimitLaw::Kind;
  switch (law.kind) {
    case K::Xi:
    case K::Eta:
    case K::Talphah:
      check_index(law.alpha, "limit law");
      if (!(law.h > 0.0) || !std::isfinite(law.h)) throw ParameterError("limit law: h must be positive");
      break;
    case K::StableSkewNeg:
      if (!(law.alpha > 1.0 && law.alpha < 2.0)) {
        throw ParameterError("StableSkewNeg needs alpha in (1, 2)");
      }
      break;
    case K::StableHalfSkewPos:
      check_index(law.alpha, "StableHalfSkewPos");
      break;
    case K::Levy:
    case K::Normal:
      break;
  }
}

cplx cf_eval(const LimitLaw& law, double t) {
  if (t == 0.0) return 1.0;
  const double u = std::abs(t);
  const double s = sign_of(t);
  const double a = law.alpha;
  using K = LimitLaw::Kind;
  cplx exponent;
  switch (law.kind) {
    case K::Normal:
      exponent = -0.5 * u * u;
      break;
    case K::Levy:
      exponent = -std::sqrt(u) * cplx(1.0, -s);
      break;
    case K::StableSkewNeg:
      exponent = -stable_c1(a) * std::pow(u, a) * cplx(1.0, -s * std::tan(a * kPi / 2.0));
      break;
    case K::StableHalfSkewPos:
      exponent = -stable_c2(a) * std::pow(u, a / 2.0) * cplx(1.0, -s * std::tan(a * kPi / 4.0));
      break;
    case K::Xi: {
      const OscIntegrals o = osc_integrals(u, a);
      exponent = law.h * a * std::pow(u, a) * cplx(-o.one_minus_cos, s * o.sin_minus_x);
      break;
    }
    case K::Eta: {
      const OscIntegrals o = osc_integrals(u, a / 2.0);
      exponent = law.h * (a / 2.0) * std::pow(u, a / 2.0) * cplx(-o.one_minus_cos, s * o.sin);
      break;
    }
    case K::Talphah: {
      const double sigma = law.sigma();
      const OscIntegrals o = osc_integrals(u / (std::sqrt(law.h) * sigma), a);
      exponent = law.h * a * std::pow(sigma, -a) * std::pow(u, a) * cplx(-o.one_minus_cos, s * o.sin_minus_x);
      break;
    }
  }
  return std::exp(exponent);
}

namespace {

// Exponent p with Im cf(t) / t ~ t^{p - 1} near 0; decides the head substitution.
double small_t_exponent(const LimitLaw& law) {
  using K = LimitLaw::Kind;
  switch (law.kind) {
    case K::Levy: return 0.5;
    case K::StableHalfSkewPos: return law.alpha / 2.0;
    case K::StableSkewNeg: return law.alpha;
    default: return 2.0;
  }
}

}  // namespace

CfInversion::CfInversion(const LimitLaw& law, const InversionConfig& config) : law_(law) {
  validate(law);
  if (config.grid < 16) throw ParameterError("inversion grid needs at least 16 nodes");
  if (!(config.tail_tol > 0.0 && config.tail_tol < 1.0)) {
    throw ParameterError("inversion tail tolerance must lie in (0, 1)");
  }
  double extent = 50.0;
  if (!config.x_grid.empty()) {
    extent = 0.0;
    for (double x : config.x_grid) extent = std::max(extent, std::abs(x));
  }

  if (config.t_max > 0.0) {
    t_max_ = config.t_max;
  } else {
    const auto above = [&](double t) { return std::abs(cf_eval(law, t)) >= config.tail_tol; };
    double hi = 1.0;
    while (above(hi)) {
      hi *= 2.0;
      if (hi > 1e9) throw NumericError("inversion: characteristic function does not decay");
    }
    double lo = hi / 2.0;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (above(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    t_max_ = hi;
  }

  static const GaussLegendreRule rule = gauss_legendre(16);
  const auto add_panel = [&](double lo, double hi, auto&& map) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const auto [t, jacobian] = map(mid + half * rule.nodes[i]);
      t_.push_back(t);
      weight_.push_back(rule.weights[i] * half * jacobian);
    }
  };

  // Head [0, t_head]: t = t_head s^m flattens the algebraic behaviour at t = 0.
  const double t_head = std::min({1.0, kPi / (extent + 1.0), t_max_});
  const int m = std::max(1, static_cast<int>(std::ceil(2.0 / small_t_exponent(law))));
  constexpr int kHeadPanels = 8;
  for (int k = 0; k < kHeadPanels; ++k) {
    add_panel(static_cast<double>(k) / kHeadPanels, static_cast<double>(k + 1) / kHeadPanels,
              [&](double s) {
                return std::pair{t_head * std::pow(s, m), t_head * m * std::pow(s, m - 1)};
              });
  }
  // Body [t_head, t_max]: panels short enough to resolve e^{-itx} for |x| <= extent.
  if (t_max_ > t_head) {
    const double width = 3.0 * kPi / (extent + 1.0);
    const auto panels = static_cast<std::size_t>(std::max(
        std::ceil((t_max_ - t_head) / width), std::ceil(config.grid / 16.0)));
    const double step = (t_max_ - t_head) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
      const double lo = t_head + step * static_cast<double>(k);
      add_panel(lo, lo + step, [](double t) { return std::pair{t, 1.0}; });
    }
  }
  phi_.reserve(t_.size());
  for (double t : t_) phi_.push_back(cf_eval(law, t));
}

double CfInversion::cdf(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < t_.size(); ++k) {
    sum += weight_[k] * (std::polar(1.0, -t_[k] * x) * phi_[k]).imag() / t_[k];
  }
  return std::clamp(0.5 - sum / kPi, 0.0, 1.0);
}

double CfInversion::pdf(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < t_.size(); ++k) {
    sum += weight_[k] * (std::polar(1.0, -t_[k] * x) * phi_[k]).real();
  }
  return sum / kPi;
}

double invert_cdf(const LimitLaw& law, const InversionConfig& config, double x) {
  return CfInversion(law, config).cdf(x);
}

std::vector<double> invert_cdf(const LimitLaw& law, const InversionConfig& config) {
  const CfInversion inversion(law, config);
  std::vector<double> out;
  out.reserve(config.x_grid.size());
  for (double x : config.x_grid) out.push_back(inversion.cdf(x));
  return out;
}

double invert_pdf(const LimitLaw& law, const InversionConfig& config, double x) {
  return CfInversion(law, config).pdf(x);
}

double quantile_by_inversion(const CfInversion& inversion, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  double lo = -1.0;
  double hi = 1.0;
  for (int k = 0; inversion.cdf(lo) > p; ++k) {
    if (k > 60) throw NumericError("quantile: cannot bracket from below");
    lo *= 2.0;
  }
  for (int k = 0; inversion.cdf(hi) < p; ++k) {
    if (k > 60) throw NumericError("quantile: cannot bracket from above");
    hi *= 2.0;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = inversion.cdf(mid);
    if (std::abs(value - p) < 1e-10 || hi - lo < 1e-13 * std::max(1.0, std::abs(mid))) return mid;
    if (value < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double quantile_by_inversion(const LimitLaw& law, double p, const InversionConfig& config) {
  return quantile_by_inversion(CfInversion(law, config), p);
}

double quantile(const LimitLaw& law, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  switch (law.kind) {
    case LimitLaw::Kind::Normal: return normal_quantile(p);
    case LimitLaw::Kind::Levy: return levy_quantile(p);
    default: return quantile_by_inversion(law, p);
  }
}

SmallHReport limit_of_T_small_h(double alpha, std::span<const double> h_grid) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw ParameterError("limit_of_T_small_h: alpha must lie in (1, 2)");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0)) throw ParameterError("limit_of_T_small_h: h must be positive");
    if (i > 0 && !(h_grid[i] < h_grid[i - 1])) {
      throw ParameterError("limit_of_T_small_h: h grid must decrease");
    }
  }
  const LimitLaw stable = LimitLaw::stable_skew_neg(alpha);
  SmallHReport report;
  report.alpha = alpha;
  for (double h : h_grid) {
    const LimitLaw law = LimitLaw::talphah(alpha, h);
    const double scale = law.sigma() / std::pow(h, 1.0 / alpha);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = -5.0 + 0.05 * i;
      worst = std::max(worst, std::abs(cf_eval(law, t * scale) - cf_eval(stable, t)));
    }
    report.h.push_back(h);
    report.max_deviation.push_back(worst);
  }
  report.decreasing = report.max_deviation.size() >= 2;
  for (std::size_t i = 1; i < report.max_deviation.size(); ++i) {
    if (!(report.max_deviation[i] < report.max_deviation[i - 1])) report.decreasing = false;
  }
  return report;
}

}  // namespace truncmean
