#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "truncmean/distributions.hpp"

namespace truncmean {

/// A threshold sequence n -> b_n.
struct TruncationRule {
  enum class Kind {
    LogN,          // log n
    Pow,           // n^p
    PowOverLog,    // n^p / (c log n)
    PowOverLog1p,  // n^p / log(1 + n)
    PowLog1p,      // n^p log(1 + n)^q
    Table,         // explicit (n, b_n) pairs
  };
  Kind kind = Kind::LogN;
  double p = 1.0;
  double c = 1.0;
  double q = 1.0;
  std::map<std::int64_t, double> table;

  static TruncationRule log_n() { return {}; }
  static TruncationRule pow(double p);
  static TruncationRule pow_over_log(double p, double c);
  static TruncationRule pow_over_log1p(double p);
  static TruncationRule pow_log1p(double p, double q);
  static TruncationRule from_table(std::map<std::int64_t, double> table);

  /// The seven reference thresholds of the Pareto(1/2) rejection tables, in table order.
  static std::vector<TruncationRule> table_rules();
};

/// Parses "log_n", "pow:P", "pow_over_log:P:C", "pow_over_log1p:P", "pow_log1p:P:Q"
/// or "table:N=B,N=B,...".
TruncationRule parse_rule(const std::string& text);
/// Inverse of parse_rule, with parameters printed to 17 significant digits.
std::string to_string(const TruncationRule& rule);
/// Short human-readable label such as "n^1.5" or "n^1.33333/(10 log n)".
std::string label(const TruncationRule& rule);

/// b_n for n >= 2.
double truncation_value(const TruncationRule& rule, std::int64_t n);

struct TruncatedStats {
  std::int64_t n = 0;
  double b = 0.0;
  double mu_hat = 0.0;  // n^-1 sum X_k 1{X_k <= b}
  double B_hat = 0.0;   // sqrt(sum (X_k(b) - mu_hat)^2)
  double xi_n = 0.0;    // sum (X_k(b) - mu_k) / b
  double eta_n = 0.0;   // sum (X_k(b) - mean mu_k)^2 / b^2
  std::optional<double> h_n;       // sum (1 - F_k(b)), needs a model
  std::map<int, double> h_n_m;     // m -> sum d(m) (1 - F_k(b)), m in 1..4 with m > alpha
};

/// Statistics with per-observation truncated means mu_k (same length as the sample).
TruncatedStats truncated_stats(std::span<const double> sample, double b,
                               std::span<const double> mu_k, const TailModel* model = nullptr);
/// Identically distributed case: every mu_k equals mu0.
TruncatedStats truncated_stats(std::span<const double> sample, double b, double mu0,
                               const TailModel* model = nullptr);

/// CSV header and row: n,b,mu_hat,B_hat,xi_n,eta_n,h_n.
std::string stats_csv_header();
std::string stats_csv_row(const TruncatedStats& stats);

/// Smallest x with n (1 - F(x)) <= h; for regularly varying models the fixed point of
/// x = (n L(x) / h)^{1/alpha}.
double critical_sequence(const TailModel& model, std::int64_t n, double h);
/// Per-observation thresholds inf{x : F_k(x) >= 1 - h/n} with n = models.size().
std::vector<double> critical_sequence(std::span<const TailModel> models, double h);

enum class Regime { SubCritical, Critical, SuperCritical, Inconclusive };
std::string to_string(Regime regime);

struct RegimeReport {
  Regime regime = Regime::Inconclusive;
  std::vector<std::int64_t> n;
  std::vector<double> b;
  std::vector<double> h;         // n (1 - F(b_n))
  double drift_per_decade = 0.0;  // relative change of h per decade over the last grid step
};

inline constexpr double kCriticalLow = 0.1;
inline constexpr double kCriticalHigh = 10.0;
inline constexpr double kDriftLimit = 0.05;

/// Regime of a rule from h_n on an increasing grid of at least four sizes.
RegimeReport classify_rule_report(const TruncationRule& rule, const TailModel& model,
                                  std::span<const std::int64_t> n_grid);
Regime classify_rule(const TruncationRule& rule, const TailModel& model,
                     std::span<const std::int64_t> n_grid);

}  // namespace truncmean
