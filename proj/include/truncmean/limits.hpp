#pragma once

#include <complex>
#include <span>
#include <vector>

namespace truncmean {

/// Values of the three oscillatory integrals on [0, t] with weight x^{-1-a}:
///   sin_minus_x:    int (sin x - x) / x^{1+a}   (a in (0, 2))
///   one_minus_cos:  int (1 - cos x) / x^{1+a}   (a in (0, 2))
///   sin:            int sin x / x^{1+a}         (a in (0, 1); NaN otherwise)
struct OscIntegrals {
  double sin_minus_x = 0.0;
  double one_minus_cos = 0.0;
  double sin = 0.0;
};

OscIntegrals osc_integrals(double t, double a);

/// Limits as t -> inf of one_minus_cos (a in (0, 2)) and sin (a in (0, 1)).
double one_minus_cos_limit(double a);
double sin_limit(double a);

/// A limit law given by its characteristic function.
struct LimitLaw {
  enum class Kind {
    Xi,                 // normalized truncated sum at a critical threshold
    Eta,                // normalized truncated sum of squares
    Talphah,            // studentized truncated mean with known variance
    StableSkewNeg,      // exp{-c1 |t|^a (1 - i sgn t tan(a pi / 2))}, a in (1, 2)
    StableHalfSkewPos,  // exp{-c2 |t|^{a/2} (1 - i sgn t tan(a pi / 4))}
    Levy,               // standard Levy, density (2 pi x^3)^{-1/2} e^{-1/(2x)}
    Normal,
  };
  Kind kind = Kind::Normal;
  double alpha = 1.0;
  double h = 1.0;

  static LimitLaw xi(double alpha, double h);
  static LimitLaw eta(double alpha, double h);
  static LimitLaw talphah(double alpha, double h);
  static LimitLaw stable_skew_neg(double alpha);
  static LimitLaw stable_half_skew_pos(double alpha);
  static LimitLaw levy() { return {Kind::Levy, 0.5, 1.0}; }
  static LimitLaw normal() { return {}; }

  /// sqrt(alpha / (2 - alpha)).
  double sigma() const;
};

/// c1 = Gamma(2 - a) |cos(a pi / 2)| / (a - 1).
double stable_c1(double alpha);
/// c2 = 2 Gamma(1 - a/2) cos(a pi / 4).
double stable_c2(double alpha);

void validate(const LimitLaw& law);
std::complex<double> cf_eval(const LimitLaw& law, double t);

struct InversionConfig {
  double t_max = 0.0;         // 0 selects the point where |cf| falls below tail_tol
  int grid = 4096;            // minimum number of quadrature nodes on the body
  double tail_tol = 1e-10;
  std::vector<double> x_grid; // evaluation points; max |x| sets the node spacing (50 if empty)
};

/// Gil-Pelaez inversion with the characteristic function tabulated once at the
/// quadrature nodes; cdf and pdf then cost one pass over the nodes per point.
class CfInversion {
 public:
  CfInversion(const LimitLaw& law, const InversionConfig& config = {});

  double cdf(double x) const;
  double pdf(double x) const;

  double t_max() const noexcept { return t_max_; }
  std::size_t node_count() const noexcept { return t_.size(); }
  const LimitLaw& law() const noexcept { return law_; }

 private:
  LimitLaw law_;
  double t_max_ = 0.0;
  std::vector<double> t_;
  std::vector<double> weight_;
  std::vector<std::complex<double>> phi_;
};

double invert_cdf(const LimitLaw& law, const InversionConfig& config, double x);
/// CDF at every point of config.x_grid.
std::vector<double> invert_cdf(const LimitLaw& law, const InversionConfig& config);
double invert_pdf(const LimitLaw& law, const InversionConfig& config, double x);

/// Normal and Levy use closed forms; other laws invert their characteristic function.
double quantile(const LimitLaw& law, double p);
/// Bisection on the inverted CDF, to 1e-10 in probability.
double quantile_by_inversion(const LimitLaw& law, double p, const InversionConfig& config = {});
double quantile_by_inversion(const CfInversion& inversion, double p);

struct SmallHReport {
  double alpha = 0.0;
  std::vector<double> h;
  std::vector<double> max_deviation;  // over t in [-5, 5]
  bool decreasing = false;
};

/// Distance between the cf of sigma T_{alpha,h} / h^{1/alpha} and the cf of
/// StableSkewNeg(alpha), along a decreasing h grid.
SmallHReport limit_of_T_small_h(double alpha, std::span<const double> h_grid);

}  // namespace truncmean
