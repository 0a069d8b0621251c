#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "truncmean/rng.hpp"

namespace truncmean {

enum class ModelKind { Pareto, RegVarying, Family };

/// The five oscillating-density families on [1, inf), all with tails ~ x^{-alpha-1}:
///   f: cos(x^-a) / (x^{1+a} (sin(x^-a) + 1))     g: x^{-(a+1)} cos(1/x)
///   h: x^{-a} sin(1/x)                          p: sin(x^{-(a+1)})
///   q: x^{-(a+1)}
enum class FamilyKind { F, G, H, P, Q };

std::string to_string(FamilyKind family);
FamilyKind family_from_string(const std::string& name);

/// Slowly varying factor L(x) of a regularly varying tail x^{-alpha} L(x).
struct SlowlyVarying {
  enum class Form {
    Constant,  // theta
    LogPower,  // theta * log(1 + x)^tau
    LogLog,    // theta * log(log(x)), x > e
  };
  Form form = Form::Constant;
  double theta = 1.0;
  double tau = 1.0;
  bool reciprocal = false;

  double operator()(double x) const;
};

namespace detail {
struct FamilyTable;
}

/// A heavy-tailed law for a nonnegative observation.
///
/// Pareto:      1 - F(x) = (x / a)^{-alpha} for x >= a.
/// RegVarying:  1 - F(x) = min(1, x^{-alpha} L(x)) once x^{-alpha} L(x) is decreasing;
///              below that point the survival is held at its running supremum, so the
///              law may put an atom at support_min when x^{-alpha} L(x) < 1 there.
/// Family:      one of f, g, h, p, q with a numerically computed normalizing constant.
class TailModel {
 public:
  static TailModel pareto(double alpha, double support_min = 1.0);
  static TailModel regularly_varying(double alpha, SlowlyVarying slowly_varying,
                                     double support_min);
  static TailModel family(FamilyKind family, double alpha);

  ModelKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double support_min() const noexcept { return support_min_; }
  const std::optional<SlowlyVarying>& slowly_varying() const noexcept { return slowly_varying_; }
  std::optional<FamilyKind> family_kind() const noexcept { return family_; }

  /// Normalizing constant c of a family density (alpha for Pareto/q).
  double norm_const() const;

  double survival(double x) const;
  double cdf(double x) const { return 1.0 - survival(x); }
  /// Density; throws ParameterError for RegVarying models.
  double density(double x) const;
  /// Smallest x with F(x) >= u.
  double quantile(double u) const { return upper_quantile(1.0 - u); }
  /// Smallest x with 1 - F(x) <= tail; keeps precision when tail is tiny.
  double upper_quantile(double tail) const;
  /// E[X^r 1{X <= b}].
  double truncated_moment(double r, double b) const;

  /// Point where the survival starts to decrease: the later of the maximizer of
  /// x^{-alpha} L(x) and the point where it falls to 1 (support_min for other kinds).
  double tail_start() const noexcept { return tail_start_; }

 private:
  TailModel() = default;

  double regvar_raw(double x) const;  // x^{-alpha} L(x)

  ModelKind kind_ = ModelKind::Pareto;
  double alpha_ = 1.0;
  double support_min_ = 1.0;
  std::optional<SlowlyVarying> slowly_varying_;
  std::optional<FamilyKind> family_;
  std::shared_ptr<const detail::FamilyTable> table_;
  double tail_start_ = 1.0;
};

double cdf(const TailModel& model, double x);

/// Inverse-CDF draws; Pareto uses (1 - U)^{-1/alpha}, the others numeric inversion.
std::vector<double> sample(const TailModel& model, RngStream& rng, std::size_t count);

/// D_n(b) = sum_k (1 - F_k(b)).
double tail_sum(std::span<const TailModel> models, double b);

struct ConditionPoint {
  double b = 0.0;
  double survival = 0.0;  // 1 - F(b); condition (I) requires this -> 0
  double moment = 0.0;    // E[X^r 1{X <= b}]
  double target = 0.0;    // d(r) b^r (1 - F(b))
  double ratio = 0.0;     // moment / target; condition (II) requires this -> 1
};

struct ConditionReport {
  int r = 1;
  double d_r = 0.0;
  std::vector<ConditionPoint> points;
  /// |ratio - 1| is nonincreasing along the grid and survival is decreasing.
  bool converging = false;
};

/// Numeric check of the truncated-moment conditions along an increasing b grid.
ConditionReport verify_conditions(const TailModel& model, int r, std::span<const double> b_grid);

}  // namespace truncmean
