#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "truncmean/testing.hpp"
#include "truncmean/truncation.hpp"

namespace truncmean {

struct SimPlan {
  double alpha0 = 0.5;
  std::vector<TruncationRule> rules = TruncationRule::table_rules();
  std::vector<std::int64_t> n_list = {1000, 10000, 100000};
  std::int64_t reps = 10000;
  double beta = 0.05;
  std::uint64_t seed = 42;
  bool known_var = true;
  bool estimated_var = true;
  bool stable_region = true;
  StableScale stable_scale = StableScale::ParetoLimit;
};

struct SimOptions {
  int threads = 0;              // 0 uses the hardware concurrency
  double draw_budget = 1e10;    // limit on sum over cells of rules * n * reps
  bool allow_large = false;
};

struct SimRow {
  TruncationRule rule;
  std::int64_t n = 0;
  std::int64_t reps = 0;
  double b = 0.0;
  double mu0 = 0.0;
  double var1 = 0.0;
  std::int64_t count_o = 0;      // known variance rejections
  std::int64_t count = 0;        // estimated variance rejections
  std::int64_t count_tilde = 0;  // stable-region rejections of the untruncated mean
  double r_o = 0.0;
  double r = 0.0;
  double r_tilde = 0.0;
  double se_o = 0.0;
  double se = 0.0;
  double se_tilde = 0.0;
};

struct SimResult {
  SimPlan plan;
  double stable_y = 0.0;  // threshold of the stable region divided by n
  std::vector<SimRow> rows;
};

/// Nominal work of a plan: sum over (rule, n) of n * reps.
double plan_work(const SimPlan& plan);
void validate(const SimPlan& plan);

/// Rejection counts for every (rule, n) cell. Each replication draws one Pareto(alpha0)
/// sample shared by all rules; results depend only on the plan, not on the thread count.
SimResult simulate_rejection_rates(const SimPlan& plan, const SimOptions& options = {});

struct Decomposition {
  double alpha = 0.0;
  std::int64_t n = 0;
  double c_n = 0.0;
  double mu_n = 0.0;
  std::vector<double> U;  // c_n^-1 sum (X_k 1{X_k <= c_n} - mu_n)
  std::vector<double> V;  // c_n^-1 sum X_k 1{X_k > c_n}
  std::vector<double> S;  // c_n^-1 sum (X_k - mu_n), accumulated directly
  double mean_exceedances = 0.0;  // average count of X_k > c_n
  double max_additivity_error = 0.0;  // max |U + V - S| / max(|S|, |U| + |V|)
};

/// Pareto(alpha) samples split at the critical threshold c_n (h = 1).
Decomposition simulate_decomposition(double alpha, std::int64_t n, std::int64_t reps,
                                     std::uint64_t seed, const SimOptions& options = {});

struct DiagnosticRow {
  std::int64_t n = 0;
  double b = 0.0;
  double ks_T = 0.0;     // KS distance of T_n to N(0, 1)
  double median_T = 0.0;
  double iqr_To = 0.0;
  std::vector<double> T;
  std::vector<double> To;
};

struct DiagnosticsReport {
  double alpha0 = 0.0;
  TruncationRule rule;
  Regime regime = Regime::Inconclusive;
  std::vector<DiagnosticRow> rows;
  bool ks_decreasing = false;
  bool median_decreasing = false;
  bool median_negative = false;
  bool iqr_decreasing = false;
};

DiagnosticsReport convergence_diagnostics(double alpha0, const TruncationRule& rule,
                                          const std::vector<std::int64_t>& n_grid,
                                          std::int64_t reps, std::uint64_t seed,
                                          const SimOptions& options = {});

/// CSV with columns rule,n,N,r_o,r,r_tilde,se_o,se,se_tilde; numbers at 6 significant
/// digits; '#' lines carry the seed and the effective configuration.
void write_csv(std::ostream& out, const SimResult& result,
               const std::vector<std::string>& header_lines = {});

}  // namespace truncmean
