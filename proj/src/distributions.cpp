#include "truncmean/distributions.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "truncmean/error.hpp"
#include "truncmean/quadrature.hpp"

namespace truncmean {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("alpha must lie in (0, 2)");
}

// (e^{k L} - 1) / k, continuous at k = 0.
double expm1_over(double k, double log_span) {
  const double kl = k * log_span;
  if (std::abs(kl) < 1e-300) return log_span;
  return std::expm1(kl) / k;
}

// Integrand of Psi(w) = int_0^w psi(v) dv, where 1 - F(x) = Psi(x^-alpha) / Psi(1).
// psi(0) = 1 for every family.
double family_kernel(FamilyKind family, double alpha, double w) {
  switch (family) {
    case FamilyKind::F:
      return std::cos(w) / (std::sin(w) + 1.0);
    case FamilyKind::G:
      return std::cos(std::pow(w, 1.0 / alpha));
    case FamilyKind::H: {
      const double s = std::pow(w, 1.0 / alpha);
      return s == 0.0 ? 1.0 : std::sin(s) / s;
    }
    case FamilyKind::P: {
      const double s = std::pow(w, (alpha + 1.0) / alpha);
      return s == 0.0 ? 1.0 : std::sin(s) / s;
    }
    case FamilyKind::Q:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

namespace detail {

/// Cumulative integral of a family kernel on a uniform grid over w in [0, 1].
struct FamilyTable {
  static constexpr int kCells = 512;

  FamilyKind family;
  double alpha;
  GaussLegendreRule rule = gauss_legendre(8);
  std::array<double, kCells + 1> cumulative{};

  FamilyTable(FamilyKind f, double a) : family(f), alpha(a) {
    cumulative[0] = 0.0;
    for (int j = 0; j < kCells; ++j) {
      cumulative[j + 1] = cumulative[j] + cell(static_cast<double>(j) / kCells,
                                               static_cast<double>(j + 1) / kCells);
    }
  }

  double kernel(double w) const { return family_kernel(family, alpha, w); }

  double cell(double lo, double hi) const {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights[i] * kernel(mid + half * rule.nodes[i]);
    }
    return sum * half;
  }

  double total() const { return cumulative[kCells]; }

  /// Psi(w) for w in [0, 1].
  double integral(double w) const {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return total();
    const int j = std::min(static_cast<int>(w * kCells), kCells - 1);
    const double lo = static_cast<double>(j) / kCells;
    return cumulative[j] + cell(lo, w);
  }

  /// w with Psi(w) = target, target in [0, total()].
  double inverse(double target) const {
    if (target <= 0.0) return 0.0;
    if (target >= total()) return 1.0;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const int j = static_cast<int>(it - cumulative.begin()) - 1;
    double lo = static_cast<double>(j) / kCells;
    double hi = static_cast<double>(j + 1) / kCells;
    // Safeguarded Newton; the kernel is positive and smooth on each cell.
    double w = lo + (target - cumulative[j]) / kernel(lo);
    for (int iter = 0; iter < 200; ++iter) {
      if (!(w > lo && w < hi)) w = 0.5 * (lo + hi);
      const double residual = integral(w) - target;
      if (residual > 0.0) {
        hi = w;
      } else {
        lo = w;
      }
      const double step = residual / kernel(w);
      w -= step;
      if (std::abs(step) <= 1e-15 * w || hi - lo <= 1e-15 * hi) break;
    }
    return std::clamp(w, lo, hi);
  }
};

}  // namespace detail

namespace {

std::shared_ptr<const detail::FamilyTable> family_table(FamilyKind family, double alpha) {
  static std::mutex mutex;
  static std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const detail::FamilyTable>>
      registry;
  const auto key = std::make_pair(static_cast<int>(family), std::bit_cast<std::uint64_t>(alpha));
  std::lock_guard lock(mutex);
  auto& slot = registry[key];
  if (!slot) slot = std::make_shared<const detail::FamilyTable>(family, alpha);
  return slot;
}

}  // namespace

std::string to_string(FamilyKind family) {
  switch (family) {
    case FamilyKind::F: return "f";
    case FamilyKind::G: return "g";
    case FamilyKind::H: return "h";
    case FamilyKind::P: return "p";
    case FamilyKind::Q: return "q";
  }
  return "?";
}

FamilyKind family_from_string(const std::string& name) {
  if (name == "f") return FamilyKind::F;
  if (name == "g") return FamilyKind::G;
  if (name == "h") return FamilyKind::H;
  if (name == "p") return FamilyKind::P;
  if (name == "q") return FamilyKind::Q;
  throw ParameterError("unknown density family '" + name + "'");
}

double SlowlyVarying::operator()(double x) const {
  double value = theta;
  switch (form) {
    case Form::Constant:
      break;
    case Form::LogPower:
      value *= std::pow(std::log1p(x), tau);
      break;
    case Form::LogLog:
      value *= std::log(std::log(x));
      break;
  }
  return reciprocal ? 1.0 / value : value;
}

TailModel TailModel::pareto(double alpha, double support_min) {
  check_alpha(alpha);
  if (!(support_min > 0.0) || !std::isfinite(support_min)) {
    throw ParameterError("support_min must be positive and finite");
  }
  TailModel m;
  m.kind_ = ModelKind::Pareto;
  m.alpha_ = alpha;
  m.support_min_ = support_min;
  m.tail_start_ = support_min;
  return m;
}

TailModel TailModel::regularly_varying(double alpha, SlowlyVarying slowly_varying,
                                       double support_min) {
  check_alpha(alpha);
  if (!(support_min > 0.0) || !std::isfinite(support_min)) {
    throw ParameterError("support_min must be positive and finite");
  }
  if (!(slowly_varying.theta > 0.0)) throw ParameterError("slowly varying scale must be positive");
  if (slowly_varying.form == SlowlyVarying::Form::LogLog && !(support_min > std::numbers::e)) {
    throw ParameterError("log log slowly varying factor needs support_min > e");
  }
  TailModel m;
  m.kind_ = ModelKind::RegVarying;
  m.alpha_ = alpha;
  m.support_min_ = support_min;
  m.slowly_varying_ = slowly_varying;

  // Locate the maximum of x^{-alpha} L(x) on a log grid, then refine by golden section.
  const auto raw_log = [&m](double t) { return m.regvar_raw(std::exp(t)); };
  const double t0 = std::log(support_min);
  constexpr int kGrid = 2000;
  const double kSpan = std::min(690.0, 700.0 - t0);
  if (kSpan < 20.0) throw ParameterError("support_min is too large");
  const double dt = kSpan / kGrid;
  std::vector<double> values(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) values[i] = raw_log(t0 + i * dt);
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ParameterError("tail function x^-alpha L(x) is not finite and nonnegative");
    }
  }
  const int top = static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
  double peak_t = t0 + top * dt;
  if (top > 0) {
    double lo = t0 + (top - 1) * dt;
    double hi = t0 + std::min(top + 1, kGrid) * dt;
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - ratio * (hi - lo);
    double d = lo + ratio * (hi - lo);
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++iter) {
      if (raw_log(c) > raw_log(d)) {
        hi = d;
      } else {
        lo = c;
      }
      c = hi - ratio * (hi - lo);
      d = lo + ratio * (hi - lo);
    }
    peak_t = std::max(t0, 0.5 * (lo + hi));
  }
  for (int i = top; i < kGrid; ++i) {
    if (values[i + 1] > values[i] * (1.0 + 1e-12)) {
      throw ParameterError("x^-alpha L(x) is not eventually decreasing");
    }
  }
  if (values[kGrid] > 1e-3 * values[top] && values[kGrid] > 1e-300) {
    throw ParameterError("x^-alpha L(x) does not vanish at infinity");
  }

  // Survival is x^{-alpha} L(x) beyond the later of the peak and the point where it drops to 1.
  double start_t = peak_t;
  if (raw_log(peak_t) > 1.0) {
    double lo = peak_t;
    double hi = t0 + kSpan;
    if (raw_log(hi) > 1.0) throw ParameterError("x^-alpha L(x) never falls below 1");
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (raw_log(mid) > 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    start_t = hi;
  }
  m.tail_start_ = std::exp(start_t);
  return m;
}

TailModel TailModel::family(FamilyKind family, double alpha) {
  check_alpha(alpha);
  TailModel m;
  m.kind_ = ModelKind::Family;
  m.alpha_ = alpha;
  m.support_min_ = 1.0;
  m.tail_start_ = 1.0;
  m.family_ = family;
  m.table_ = family_table(family, alpha);
  return m;
}

double TailModel::regvar_raw(double x) const {
  return std::exp(-alpha_ * std::log(x)) * (*slowly_varying_)(x);
}

double TailModel::norm_const() const {
  switch (kind_) {
    case ModelKind::Pareto:
      return alpha_ * std::pow(support_min_, alpha_);
    case ModelKind::Family:
      return alpha_ / table_->total();
    case ModelKind::RegVarying:
      break;
  }
  throw ParameterError("regularly varying models have no density constant");
}

double TailModel::survival(double x) const {
  if (std::isnan(x)) throw DomainError("survival: x is NaN");
  if (x < support_min_) return 1.0;
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  switch (kind_) {
    case ModelKind::Pareto:
      return std::exp(-alpha_ * std::log(x / support_min_));
    case ModelKind::Family:
      return table_->integral(std::exp(-alpha_ * std::log(x))) / table_->total();
    case ModelKind::RegVarying:
      return std::min(1.0, regvar_raw(std::max(x, tail_start_)));
  }
  return 0.0;
}

double TailModel::density(double x) const {
  if (x < support_min_ || x == std::numeric_limits<double>::infinity()) return 0.0;
  switch (kind_) {
    case ModelKind::Pareto:
      return alpha_ / x * std::exp(-alpha_ * std::log(x / support_min_));
    case ModelKind::Family: {
      const double w = std::exp(-alpha_ * std::log(x));
      return norm_const() * w / x * table_->kernel(w);
    }
    case ModelKind::RegVarying:
      break;
  }
  throw ParameterError("density is not available for regularly varying models");
}

double TailModel::upper_quantile(double tail) const {
  if (!(tail >= 0.0 && tail <= 1.0)) throw DomainError("quantile: probability must lie in [0, 1]");
  if (tail == 0.0) return std::numeric_limits<double>::infinity();
  switch (kind_) {
    case ModelKind::Pareto:
      return support_min_ * std::exp(-std::log(tail) / alpha_);
    case ModelKind::Family: {
      if (tail == 1.0) return 1.0;
      const double w = table_->inverse(tail * table_->total());
      return std::max(1.0, std::exp(-std::log(w) / alpha_));
    }
    case ModelKind::RegVarying: {
      if (tail >= regvar_raw(tail_start_)) return support_min_;
      double lo = std::log(tail_start_);
      double hi = lo + 1.0;
      while (regvar_raw(std::exp(hi)) > tail) {
        lo = hi;
        hi = lo + 2.0 * (hi - std::log(tail_start_));
        if (hi > 709.0) throw NumericError("quantile: upper bracket overflow");
      }
      for (int iter = 0; iter < 300 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (regvar_raw(std::exp(mid)) > tail) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return std::exp(hi);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double TailModel::truncated_moment(double r, double b) const {
  if (!(r > 0.0)) throw ParameterError("truncated_moment: order must be positive");
  if (std::isnan(b)) throw DomainError("truncated_moment: b is NaN");
  if (b < support_min_) return 0.0;
  const QuadOptions opts{0.0, 1e-12, 4000};
  switch (kind_) {
    case ModelKind::Pareto: {
      const double a = support_min_;
      return alpha_ * std::pow(a, r) * expm1_over(r - alpha_, std::log(b / a));
    }
    case ModelKind::Family: {
      // c * int_1^b x^{r-1-alpha} psi(x^-alpha) dx, with psi = 1 done in closed form.
      const double c = norm_const();
      const double log_b = std::log(b);
      const double head = c * expm1_over(r - alpha_, log_b);
      const auto correction = [this, r](double t) {
        const double w = std::exp(-alpha_ * t);
        return std::exp((r - alpha_) * t) * (table_->kernel(w) - 1.0);
      };
      const QuadResult rest = integrate(correction, 0.0, log_b, opts);
      return head + c * rest.value;
    }
    case ModelKind::RegVarying: {
      // a^r - b^r S(b) + r int_a^b x^{r-1} S(x) dx; S is flat on [a, tail_start].
      const double a = support_min_;
      const double start = std::min(tail_start_, b);
      const double flat = survival(a);
      double integral = flat * (std::pow(start, r) - std::pow(a, r));
      if (b > start) {
        const auto integrand = [this, r](double t) {
          return r * std::exp(r * t) * std::min(1.0, regvar_raw(std::exp(t)));
        };
        integral += integrate(integrand, std::log(start), std::log(b), opts).value;
      }
      return std::pow(a, r) - std::pow(b, r) * survival(b) + integral;
    }
  }
  return 0.0;
}

double cdf(const TailModel& model, double x) { return model.cdf(x); }

std::vector<double> sample(const TailModel& model, RngStream& rng, std::size_t count) {
  std::vector<double> out(count);
  if (model.kind() == ModelKind::Pareto) {
    const double inv_alpha = 1.0 / model.alpha();
    const double a = model.support_min();
    for (auto& x : out) x = a * std::pow(1.0 - rng.uniform(), -inv_alpha);
    return out;
  }
  for (auto& x : out) x = model.upper_quantile(1.0 - rng.uniform());
  return out;
}

double tail_sum(std::span<const TailModel> models, double b) {
  double total = 0.0;
  for (const auto& m : models) total += m.survival(b);
  return total;
}

ConditionReport verify_conditions(const TailModel& model, int r, std::span<const double> b_grid) {
  if (r < 1) throw ParameterError("verify_conditions: r must be at least 1");
  if (!(r > model.alpha())) throw ParameterError("verify_conditions: r must exceed alpha");
  for (std::size_t i = 1; i < b_grid.size(); ++i) {
    if (!(b_grid[i] > b_grid[i - 1])) throw ParameterError("verify_conditions: b grid must increase");
  }
  ConditionReport report;
  report.r = r;
  report.d_r = model.alpha() / (r - model.alpha());
  for (double b : b_grid) {
    ConditionPoint p;
    p.b = b;
    p.survival = model.survival(b);
    p.moment = model.truncated_moment(r, b);
    p.target = report.d_r * std::pow(b, r) * p.survival;
    p.ratio = p.moment / p.target;
    report.points.push_back(p);
  }
  bool converging = report.points.size() >= 2;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    const auto& prev = report.points[i - 1];
    const auto& cur = report.points[i];
    if (!(cur.survival < prev.survival)) converging = false;
    if (std::abs(cur.ratio - 1.0) > std::abs(prev.ratio - 1.0) * (1.0 + 1e-9) + 1e-12) {
      converging = false;
    }
  }
  report.converging = converging;
  return report;
}

}  // namespace truncmean
