#include "truncmean/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "truncmean/empirical.hpp"
#include "truncmean/error.hpp"
#include "truncmean/rng.hpp"
#include "truncmean/special.hpp"

namespace truncmean {

namespace {

/// Pareto(alpha) on [1, inf) by inversion of v = 1 - U in (0, 1].
class ParetoDraw {
 public:
  explicit ParetoDraw(double alpha) : inv_alpha_(1.0 / alpha) {
    const double rounded = std::round(inv_alpha_);
    if (rounded >= 1.0 && rounded <= 4.0 && std::abs(inv_alpha_ - rounded) < 1e-15) {
      power_ = static_cast<int>(rounded);
    }
  }

  double operator()(RngStream& rng) const {
    const double w = 1.0 / (1.0 - rng.uniform());
    switch (power_) {
      case 1: return w;
      case 2: return w * w;
      case 3: return w * w * w;
      case 4: return (w * w) * (w * w);
      default: return std::exp(std::log(w) * inv_alpha_);
    }
  }

 private:
  double inv_alpha_;
  int power_ = 0;
};

int worker_count(const SimOptions& options, std::int64_t reps) {
  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(1, reps)));
}

/// Runs body(worker, begin, end) on contiguous replication blocks.
template <class Body>
void parallel_blocks(std::int64_t reps, int workers, Body&& body) {
  if (workers <= 1) {
    body(0, std::int64_t{0}, reps);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = reps * w / workers;
    const std::int64_t end = reps * (w + 1) / workers;
    pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

ParetoMoments moments_or_zero(double alpha0, double b) {
  if (b < 1.0) return {};
  return pareto_truncated_moments(alpha0, b);
}

double standard_error(double rate, std::int64_t reps) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double plan_work(const SimPlan& plan) {
  double work = 0.0;
  for (auto n : plan.n_list) {
    work += static_cast<double>(plan.rules.size()) * static_cast<double>(n) *
            static_cast<double>(plan.reps);
  }
  return work;
}

void validate(const SimPlan& plan) {
  if (!(plan.alpha0 > 0.0 && plan.alpha0 < 2.0)) throw ParameterError("plan: alpha0 must lie in (0, 2)");
  if (!(plan.beta > 0.0 && plan.beta < 1.0)) throw ParameterError("plan: beta must lie in (0, 1)");
  if (plan.reps < 1) throw ParameterError("plan: reps must be at least 1");
  if (plan.n_list.empty()) throw ParameterError("plan: n list is empty");
  if (plan.rules.empty()) throw ParameterError("plan: rule list is empty");
  for (auto n : plan.n_list) {
    if (n < 2) throw ParameterError("plan: every n must be at least 2");
  }
}

SimResult simulate_rejection_rates(const SimPlan& plan, const SimOptions& options) {
  validate(plan);
  if (!options.allow_large && plan_work(plan) > options.draw_budget) {
    throw BudgetError("plan needs " + fmt6(plan_work(plan)) + " rule-draws, above the budget of " +
                      fmt6(options.draw_budget) + "; pass the allow-large override to run it");
  }
  SimResult result;
  result.plan = plan;
  const double z = z_quantile(plan.beta);
  const ParetoDraw draw(plan.alpha0);
  const std::size_t rule_count = plan.rules.size();

  for (auto n : plan.n_list) {
    const double nd = static_cast<double>(n);
    std::vector<double> b(rule_count);
    std::vector<ParetoMoments> mom(rule_count);
    for (std::size_t r = 0; r < rule_count; ++r) {
      b[r] = truncation_value(plan.rules[r], n);
      mom[r] = moments_or_zero(plan.alpha0, b[r]);
    }
    const StableRegion stable = rejection_region_stable(n, plan.beta, plan.stable_scale);
    result.stable_y = stable.threshold / nd;

    const int workers = worker_count(options, plan.reps);
    // counts[worker][rule][mode]
    std::vector<std::vector<std::array<std::int64_t, 3>>> counts(
        static_cast<std::size_t>(workers), std::vector<std::array<std::int64_t, 3>>(rule_count, {0, 0, 0}));
    const std::uint64_t n_key = derive_seed(plan.seed, static_cast<std::uint64_t>(n));

    parallel_blocks(plan.reps, workers, [&](int w, std::int64_t begin, std::int64_t end) {
      std::vector<double> s1(rule_count);
      std::vector<double> s2(rule_count);
      auto& local = counts[static_cast<std::size_t>(w)];
      for (std::int64_t rep = begin; rep < end; ++rep) {
        RngStream rng = rng_substream(n_key, static_cast<std::uint64_t>(rep));
        std::fill(s1.begin(), s1.end(), 0.0);
        std::fill(s2.begin(), s2.end(), 0.0);
        double total = 0.0;
        for (std::int64_t k = 0; k < n; ++k) {
          const double x = draw(rng);
          total += x;
          for (std::size_t r = 0; r < rule_count; ++r) {
            const double d = (x <= b[r] ? x : 0.0) - mom[r].mu0;
            s1[r] += d;
            s2[r] += d * d;
          }
        }
        for (std::size_t r = 0; r < rule_count; ++r) {
          // |n (mu_hat - mu0)| > z * scale, i.e. mu_hat strictly outside the cut points.
          const double deviation = std::abs(s1[r]);
          if (plan.known_var && mom[r].var1 > 0.0 && deviation > z * std::sqrt(nd * mom[r].var1)) {
            ++local[r][0];
          }
          if (plan.estimated_var) {
            const double b_hat = std::sqrt(std::max(0.0, s2[r] - s1[r] * s1[r] / nd));
            if (deviation > z * b_hat) ++local[r][1];
          }
        }
        if (plan.stable_region && stable.contains(total / nd)) {
          for (std::size_t r = 0; r < rule_count; ++r) ++local[r][2];
        }
      }
    });

    for (std::size_t r = 0; r < rule_count; ++r) {
      SimRow row;
      row.rule = plan.rules[r];
      row.n = n;
      row.reps = plan.reps;
      row.b = b[r];
      row.mu0 = mom[r].mu0;
      row.var1 = mom[r].var1;
      for (const auto& local : counts) {
        row.count_o += local[r][0];
        row.count += local[r][1];
        row.count_tilde += local[r][2];
      }
      const double reps = static_cast<double>(plan.reps);
      row.r_o = static_cast<double>(row.count_o) / reps;
      row.r = static_cast<double>(row.count) / reps;
      row.r_tilde = static_cast<double>(row.count_tilde) / reps;
      row.se_o = standard_error(row.r_o, plan.reps);
      row.se = standard_error(row.r, plan.reps);
      row.se_tilde = standard_error(row.r_tilde, plan.reps);
      result.rows.push_back(row);
    }
  }
  return result;
}

Decomposition simulate_decomposition(double alpha, std::int64_t n, std::int64_t reps,
                                     std::uint64_t seed, const SimOptions& options) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("decomposition: alpha must lie in (0, 2)");
  if (n < 2) throw ParameterError("decomposition: n must be at least 2");
  if (reps < 1) throw ParameterError("decomposition: reps must be at least 1");
  const double work = static_cast<double>(n) * static_cast<double>(reps);
  if (!options.allow_large && work > options.draw_budget) {
    throw BudgetError("decomposition needs " + fmt6(work) + " draws, above the budget");
  }
  Decomposition out;
  out.alpha = alpha;
  out.n = n;
  out.c_n = critical_sequence(TailModel::pareto(alpha), n, 1.0);
  out.mu_n = alpha < 1.0 ? 0.0 : pareto_truncated_moments(alpha, out.c_n).mu0;
  out.U.resize(static_cast<std::size_t>(reps));
  out.V.resize(static_cast<std::size_t>(reps));
  out.S.resize(static_cast<std::size_t>(reps));
  std::vector<std::int64_t> exceed(static_cast<std::size_t>(reps));

  const ParetoDraw draw(alpha);
  const double nd = static_cast<double>(n);
  const double c = out.c_n;
  const double mu = out.mu_n;
  const std::uint64_t n_key = derive_seed(seed, static_cast<std::uint64_t>(n));
  parallel_blocks(reps, worker_count(options, reps), [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t rep = begin; rep < end; ++rep) {
      RngStream rng = rng_substream(n_key, static_cast<std::uint64_t>(rep));
      double lower = 0.0;
      double upper = 0.0;
      double whole = 0.0;
      std::int64_t count = 0;
      for (std::int64_t k = 0; k < n; ++k) {
        const double x = draw(rng);
        whole += x - mu;
        if (x <= c) {
          lower += x;
        } else {
          upper += x;
          ++count;
        }
      }
      const auto i = static_cast<std::size_t>(rep);
      out.U[i] = (lower - nd * mu) / c;
      out.V[i] = upper / c;
      out.S[i] = whole / c;
      exceed[i] = count;
    }
  });

  double total_exceed = 0.0;
  for (std::size_t i = 0; i < out.U.size(); ++i) {
    total_exceed += static_cast<double>(exceed[i]);
    const double denom = std::max(std::abs(out.S[i]), std::abs(out.U[i]) + std::abs(out.V[i]));
    if (denom > 0.0) {
      out.max_additivity_error =
          std::max(out.max_additivity_error, std::abs(out.U[i] + out.V[i] - out.S[i]) / denom);
    }
  }
  out.mean_exceedances = total_exceed / static_cast<double>(reps);
  return out;
}

DiagnosticsReport convergence_diagnostics(double alpha0, const TruncationRule& rule,
                                          const std::vector<std::int64_t>& n_grid,
                                          std::int64_t reps, std::uint64_t seed,
                                          const SimOptions& options) {
  if (!(alpha0 > 0.0 && alpha0 < 2.0)) throw ParameterError("diagnostics: alpha0 must lie in (0, 2)");
  if (n_grid.empty()) throw ParameterError("diagnostics: n grid is empty");
  if (reps < 2) throw ParameterError("diagnostics: reps must be at least 2");
  double work = 0.0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw ParameterError("diagnostics: every n must be at least 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ParameterError("diagnostics: n grid must increase");
    work += static_cast<double>(n_grid[i]) * static_cast<double>(reps);
  }
  if (!options.allow_large && work > options.draw_budget) {
    throw BudgetError("diagnostics need " + fmt6(work) + " draws, above the budget");
  }

  DiagnosticsReport report;
  report.alpha0 = alpha0;
  report.rule = rule;
  const TailModel h0 = TailModel::pareto(alpha0);
  if (n_grid.size() >= 4) {
    report.regime = classify_rule(rule, h0, n_grid);
  } else {
    const std::vector<std::int64_t> grid = {1000, 10000, 100000, 1000000};
    report.regime = classify_rule(rule, h0, grid);
  }
  const ParetoDraw draw(alpha0);

  for (auto n : n_grid) {
    DiagnosticRow row;
    row.n = n;
    row.b = truncation_value(rule, n);
    const ParetoMoments mom = moments_or_zero(alpha0, row.b);
    const double nd = static_cast<double>(n);
    const double known_scale = std::sqrt(nd * mom.var1);
    row.T.resize(static_cast<std::size_t>(reps));
    row.To.resize(static_cast<std::size_t>(reps));
    const std::uint64_t n_key = derive_seed(seed, static_cast<std::uint64_t>(n));
    parallel_blocks(reps, worker_count(options, reps), [&](int, std::int64_t begin, std::int64_t end) {
      for (std::int64_t rep = begin; rep < end; ++rep) {
        RngStream rng = rng_substream(n_key, static_cast<std::uint64_t>(rep));
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::int64_t k = 0; k < n; ++k) {
          const double x = draw(rng);
          const double d = (x <= row.b ? x : 0.0) - mom.mu0;
          s1 += d;
          s2 += d * d;
        }
        const double b_hat = std::sqrt(std::max(0.0, s2 - s1 * s1 / nd));
        const auto i = static_cast<std::size_t>(rep);
        row.T[i] = b_hat > 0.0 ? s1 / b_hat : (s1 == 0.0 ? 0.0 : std::copysign(INFINITY, s1));
        row.To[i] = known_scale > 0.0 ? s1 / known_scale : 0.0;
      }
    });
    row.ks_T = ks_distance(row.T, [](double x) { return normal_cdf(x); });
    row.median_T = median(row.T);
    row.iqr_To = interquartile_range(row.To);
    report.rows.push_back(std::move(row));
  }

  const auto strictly_down = [&](auto field) {
    if (report.rows.size() < 2) return false;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      if (!(field(report.rows[i]) < field(report.rows[i - 1]))) return false;
    }
    return true;
  };
  report.ks_decreasing = strictly_down([](const DiagnosticRow& r) { return r.ks_T; });
  report.median_decreasing = strictly_down([](const DiagnosticRow& r) { return r.median_T; });
  report.iqr_decreasing = strictly_down([](const DiagnosticRow& r) { return r.iqr_To; });
  report.median_negative = std::all_of(report.rows.begin(), report.rows.end(),
                                       [](const DiagnosticRow& r) { return r.median_T < 0.0; });
  return report;
}

void write_csv(std::ostream& out, const SimResult& result, const std::vector<std::string>& header_lines) {
  out << "# seed=" << result.plan.seed << "\n";
  for (const auto& line : header_lines) out << "# " << line << "\n";
  out << "rule,n,N,r_o,r,r_tilde,se_o,se,se_tilde\n";
  for (const auto& row : result.rows) {
    out << csv_field(to_string(row.rule)) << ',' << row.n << ',' << row.reps << ',' << fmt6(row.r_o)
        << ',' << fmt6(row.r) << ',' << fmt6(row.r_tilde) << ',' << fmt6(row.se_o) << ','
        << fmt6(row.se) << ',' << fmt6(row.se_tilde) << '\n';
  }
}

}  // namespace truncmean
