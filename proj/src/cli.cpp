#include "truncmean/cli.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "truncmean/empirical.hpp"
#include "truncmean/io.hpp"
#include "truncmean/limits.hpp"
#include "truncmean/montecarlo.hpp"
#include "truncmean/testing.hpp"
#include "truncmean/truncation.hpp"

namespace truncmean {

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format = "csv";
  double alpha0 = 0.5;
  double beta = 0.05;
  double alpha = 0.5;
  double h = 1.0;
  double p = 0.5;
  double x_min = -5.0;
  double x_max = 5.0;
  int points = 201;
  std::vector<std::string> rules;
  std::vector<std::int64_t> n;
  std::int64_t reps = 10000;
  std::uint64_t seed = 42;
  int threads = 0;
  bool allow_large = false;
  std::string law = "normal";
  std::string data;
  std::string variance = "estimated";
  std::string mode = "diagnostics";
  std::string stable_scale = "pareto_limit";
  std::vector<std::string> modes;
};

/// Resolves one setting with precedence flag > config file > default.
class Settings {
 public:
  Settings(const CLI::App& sub, json config) : sub_(sub), config_(std::move(config)) {}

  bool flagged(const std::string& flag) const {
    const CLI::Option* opt = sub_.get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  }

  template <class T>
  T get(const std::string& flag, const char* key, const T& flag_value) const {
    if (flagged(flag)) return flag_value;
    if (config_.contains(key)) {
      try {
        return config_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ParameterError(std::string("config key '") + key + "': " + e.what());
      }
    }
    return flag_value;
  }

  const json& config() const { return config_; }

 private:
  const CLI::App& sub_;
  json config_;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ParameterError("config file must hold a JSON object");
  return j;
}

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

template <class T>
std::string joined(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ";";
    if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

/// Destination stream: the --out file when given, otherwise standard output.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ParameterError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::string checked_format(const std::string& format) {
  if (format != "csv" && format != "json") throw ParameterError("format must be 'csv' or 'json'");
  return format;
}

std::vector<TruncationRule> resolve_rules(const Settings& s, const Flags& f) {
  if (s.flagged("--rule")) {
    std::vector<TruncationRule> rules;
    for (const auto& text : f.rules) rules.push_back(parse_rule(text));
    return rules;
  }
  const json& cfg = s.config();
  if (cfg.contains("rules")) {
    std::vector<TruncationRule> rules;
    for (const auto& r : cfg.at("rules")) rules.push_back(rule_from_json(r));
    return rules;
  }
  if (cfg.contains("rule")) return {rule_from_json(cfg.at("rule"))};
  return {};
}

TruncationRule single_rule(const Settings& s, const Flags& f, TruncationRule fallback) {
  const auto rules = resolve_rules(s, f);
  if (rules.size() > 1) throw ParameterError("this subcommand takes a single rule");
  return rules.empty() ? fallback : rules.front();
}

std::vector<std::int64_t> resolve_n(const Settings& s, const Flags& f, std::vector<std::int64_t> fallback) {
  if (s.flagged("--n")) return f.n;
  const json& cfg = s.config();
  if (cfg.contains("n")) {
    const json& n = cfg.at("n");
    try {
      return n.is_array() ? n.get<std::vector<std::int64_t>>()
                          : std::vector<std::int64_t>{n.get<std::int64_t>()};
    } catch (const json::exception& e) {
      throw ParameterError(std::string("config key 'n': ") + e.what());
    }
  }
  return fallback;
}

SimOptions resolve_options(const Settings& s, const Flags& f) {
  SimOptions o;
  o.threads = s.get<int>("--threads", "threads", f.threads);
  o.allow_large = s.get<bool>("--allow-large", "allow_large", f.allow_large);
  return o;
}

int cmd_tables(const Settings& s, const Flags& f, std::ostream& out) {
  SimPlan plan = plan_from_json(s.config());
  if (s.flagged("--alpha0")) plan.alpha0 = f.alpha0;
  if (s.flagged("--beta")) plan.beta = f.beta;
  if (s.flagged("--reps")) plan.reps = f.reps;
  if (s.flagged("--seed")) plan.seed = f.seed;
  if (s.flagged("--n")) plan.n_list = f.n;
  if (s.flagged("--rule")) {
    plan.rules.clear();
    for (const auto& text : f.rules) plan.rules.push_back(parse_rule(text));
  }
  if (s.flagged("--stable-scale")) plan.stable_scale = stable_scale_from_string(f.stable_scale);
  if (s.flagged("--modes")) plan = plan_from_json(json{{"modes", f.modes}}, plan);
  const std::string format = checked_format(s.get<std::string>("--format", "format", f.format));
  const SimResult result = simulate_rejection_rates(plan, resolve_options(s, f));

  Output dest(s.get<std::string>("--out", "out", f.out), out);
  if (format == "json") {
    *dest << to_json(result).dump(2) << "\n";
    return kExitOk;
  }
  std::vector<std::string> rule_names;
  for (const auto& r : plan.rules) rule_names.push_back(to_string(r));
  std::vector<std::string> modes;
  if (plan.known_var) modes.emplace_back("known");
  if (plan.estimated_var) modes.emplace_back("estimated");
  if (plan.stable_region) modes.emplace_back("stable");
  write_csv(*dest, result,
            {"alpha0=" + fmt(plan.alpha0, 10) + " beta=" + fmt(plan.beta, 10) +
                 " reps=" + std::to_string(plan.reps) + " n=" + joined(plan.n_list),
             "rules=" + joined(rule_names),
             "modes=" + joined(modes) + " stable_scale=" + to_string(plan.stable_scale) +
                 " stable_y=" + fmt(result.stable_y, 10)});
  return kExitOk;
}

int cmd_simulate(const Settings& s, const Flags& f, std::ostream& out) {
  const std::string mode = s.get<std::string>("--mode", "mode", f.mode);
  const std::string format = checked_format(s.get<std::string>("--format", "format", f.format));
  const std::int64_t reps = s.get<std::int64_t>("--reps", "reps", f.reps);
  const std::uint64_t seed = s.get<std::uint64_t>("--seed", "seed", f.seed);
  const SimOptions options = resolve_options(s, f);
  Output dest(s.get<std::string>("--out", "out", f.out), out);

  if (mode == "decomposition") {
    const double alpha = s.get<double>("--alpha", "alpha", f.alpha);
    const auto n_list = resolve_n(s, f, {10000});
    if (n_list.size() != 1) throw ParameterError("decomposition takes a single n");
    const Decomposition d = simulate_decomposition(alpha, n_list.front(), reps, seed, options);
    if (format == "json") {
      *dest << json{{"alpha", d.alpha}, {"n", d.n}, {"reps", reps}, {"seed", seed},
                    {"c_n", d.c_n}, {"mu_n", d.mu_n}, {"mean_exceedances", d.mean_exceedances},
                    {"max_additivity_error", d.max_additivity_error},
                    {"U", d.U}, {"V", d.V}, {"S", d.S}}
                   .dump(2)
            << "\n";
      return kExitOk;
    }
    *dest << "# seed=" << seed << "\n"
          << "# mode=decomposition alpha=" << fmt(alpha, 10) << " n=" << d.n << " reps=" << reps
          << " c_n=" << fmt(d.c_n, 10) << " mu_n=" << fmt(d.mu_n, 10) << "\n"
          << "# mean_exceedances=" << fmt(d.mean_exceedances) << " max_additivity_error="
          << fmt(d.max_additivity_error, 3) << "\n"
          << "U,V,S\n";
    for (std::size_t i = 0; i < d.U.size(); ++i) {
      *dest << fmt(d.U[i]) << ',' << fmt(d.V[i]) << ',' << fmt(d.S[i]) << "\n";
    }
    return kExitOk;
  }
  if (mode != "diagnostics") throw ParameterError("mode must be 'diagnostics' or 'decomposition'");

  const double alpha0 = s.get<double>("--alpha0", "alpha0", f.alpha0);
  const TruncationRule rule = single_rule(s, f, TruncationRule::pow(1.0));
  const auto n_grid = resolve_n(s, f, {1000, 10000, 100000});
  const DiagnosticsReport r = convergence_diagnostics(alpha0, rule, n_grid, reps, seed, options);
  if (format == "json") {
    json rows = json::array();
    for (const auto& row : r.rows) {
      rows.push_back({{"n", row.n}, {"b", row.b}, {"ks_T", row.ks_T}, {"median_T", row.median_T},
                      {"iqr_To", row.iqr_To}});
    }
    *dest << json{{"alpha0", alpha0}, {"rule", to_string(rule)}, {"reps", reps}, {"seed", seed},
                  {"regime", to_string(r.regime)}, {"ks_decreasing", r.ks_decreasing},
                  {"median_decreasing", r.median_decreasing}, {"median_negative", r.median_negative},
                  {"iqr_decreasing", r.iqr_decreasing}, {"rows", rows}}
                 .dump(2)
          << "\n";
    return kExitOk;
  }
  *dest << "# seed=" << seed << "\n"
        << "# mode=diagnostics alpha0=" << fmt(alpha0, 10) << " rule=" << to_string(rule)
        << " reps=" << reps << " regime=" << to_string(r.regime) << "\n"
        << "# ks_decreasing=" << r.ks_decreasing << " median_decreasing=" << r.median_decreasing
        << " median_negative=" << r.median_negative << " iqr_decreasing=" << r.iqr_decreasing << "\n"
        << "n,b,ks_T,median_T,iqr_To\n";
  for (const auto& row : r.rows) {
    *dest << row.n << ',' << fmt(row.b) << ',' << fmt(row.ks_T) << ',' << fmt(row.median_T) << ','
          << fmt(row.iqr_To) << "\n";
  }
  return kExitOk;
}

int cmd_test(const Settings& s, const Flags& f, std::ostream& out) {
  TestConfig config;
  config.alpha0 = s.get<double>("--alpha0", "alpha0", f.alpha0);
  config.beta = s.get<double>("--beta", "beta", f.beta);
  config.variance_mode = variance_mode_from_string(s.get<std::string>("--variance", "variance", f.variance));
  config.rule = single_rule(s, f, TruncationRule::log_n());
  const std::string path = s.get<std::string>("--data", "data", f.data);
  if (path.empty()) throw ParameterError("test needs a data file (--data)");
  const std::vector<double> sample = read_data_csv_file(path);
  const TestOutcome outcome = run_test(sample, config);
  Output dest(s.get<std::string>("--out", "out", f.out), out);
  *dest << to_json(outcome).dump(2) << "\n";
  return kExitOk;
}

LimitLaw resolve_law(const Settings& s, const Flags& f) {
  return law_from_name(s.get<std::string>("--law", "law", f.law), s.get<double>("--alpha", "alpha", f.alpha),
                       s.get<double>("--h", "h", f.h));
}

int cmd_quantile(const Settings& s, const Flags& f, std::ostream& out) {
  const LimitLaw law = resolve_law(s, f);
  const double p = s.get<double>("--p", "p", f.p);
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("p must lie in (0, 1)");
  Output dest(s.get<std::string>("--out", "out", f.out), out);
  *dest << fmt(quantile(law, p), 10) << "\n";
  return kExitOk;
}

int cmd_cfpdf(const Settings& s, const Flags& f, std::ostream& out) {
  const LimitLaw law = resolve_law(s, f);
  const double x_min = s.get<double>("--x-min", "x_min", f.x_min);
  const double x_max = s.get<double>("--x-max", "x_max", f.x_max);
  const int points = s.get<int>("--points", "points", f.points);
  if (points < 2 || !(x_max > x_min)) throw ParameterError("cfpdf needs x_max > x_min and at least 2 points");
  const std::string format = checked_format(s.get<std::string>("--format", "format", f.format));
  InversionConfig config;
  for (int i = 0; i < points; ++i) config.x_grid.push_back(x_min + (x_max - x_min) * i / (points - 1));
  const CfInversion inversion(law, config);
  Output dest(s.get<std::string>("--out", "out", f.out), out);
  if (format == "json") {
    json rows = json::array();
    for (double x : config.x_grid) rows.push_back({{"x", x}, {"pdf", inversion.pdf(x)}, {"cdf", inversion.cdf(x)}});
    *dest << json{{"law", law_name(law.kind)}, {"alpha", law.alpha}, {"h", law.h}, {"rows", rows}}.dump(2)
          << "\n";
    return kExitOk;
  }
  *dest << "# law=" << law_name(law.kind) << " alpha=" << fmt(law.alpha, 10) << " h=" << fmt(law.h, 10)
        << " t_max=" << fmt(inversion.t_max()) << " nodes=" << inversion.node_count() << "\n"
        << "x,pdf,cdf\n";
  for (double x : config.x_grid) {
    *dest << fmt(x) << ',' << fmt(inversion.pdf(x)) << ',' << fmt(inversion.cdf(x)) << "\n";
  }
  return kExitOk;
}

int cmd_classify(const Settings& s, const Flags& f, std::ostream& out) {
  const double alpha0 = s.get<double>("--alpha0", "alpha0", f.alpha0);
  const TruncationRule rule = single_rule(s, f, TruncationRule::log_n());
  const auto grid = resolve_n(s, f, {1000, 10000, 100000, 1000000});
  const TailModel model = s.config().contains("model") ? tail_model_from_json(s.config().at("model"))
                                                       : TailModel::pareto(alpha0);
  const RegimeReport report = classify_rule_report(rule, model, grid);
  Output dest(s.get<std::string>("--out", "out", f.out), out);
  if (s.get<std::string>("--format", "format", f.format) == "json") {
    *dest << to_json(report).dump(2) << "\n";
  } else {
    *dest << to_string(report.regime) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truncated-mean hypothesis tests for heavy-tailed data"};
  app.name("truncmean");
  app.require_subcommand(1, 1);
  Flags f;

  const auto common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--config", f.config, "JSON config file (flags override its keys)");
    sub->add_option("--out", f.out, "Output file (default: standard output)");
    sub->add_option("--format", f.format, "Output format: csv or json");
  };
  const auto sim_flags = [&](CLI::App* sub) {
    sub->add_option("--n", f.n, "Sample size(s)")->delimiter(',');
    sub->add_option("--reps", f.reps, "Replications per cell");
    sub->add_option("--seed", f.seed, "Base seed");
    sub->add_option("--threads", f.threads, "Worker threads (0: all cores)");
    sub->add_flag("--allow-large", f.allow_large, "Run plans above the draw budget");
  };

  CLI::App* tables = app.add_subcommand("tables", "Rejection-rate tables for Pareto data under H0");
  common(tables);
  sim_flags(tables);
  tables->add_option("--alpha0", f.alpha0, "Tail index under H0");
  tables->add_option("--beta", f.beta, "Significance level");
  tables->add_option("--rule", f.rules, "Truncation rule, repeatable (e.g. pow:1.5)");
  tables->add_option("--modes", f.modes, "Subset of known,estimated,stable")->delimiter(',');
  tables->add_option("--stable-scale", f.stable_scale, "standard or pareto_limit");

  CLI::App* simulate = app.add_subcommand("simulate", "Convergence diagnostics or U/V decomposition");
  common(simulate);
  sim_flags(simulate);
  simulate->add_option("--mode", f.mode, "diagnostics or decomposition");
  simulate->add_option("--alpha0", f.alpha0, "Tail index (diagnostics)");
  simulate->add_option("--alpha", f.alpha, "Tail index (decomposition)");
  simulate->add_option("--rule", f.rules, "Truncation rule (diagnostics)");

  CLI::App* test = app.add_subcommand("test", "Test H0: tail index alpha0 on a data file");
  common(test);
  test->add_option("--data", f.data, "CSV file, one nonnegative value per line");
  test->add_option("--alpha0", f.alpha0, "Tail index under H0");
  test->add_option("--beta", f.beta, "Significance level");
  test->add_option("--rule", f.rules, "Truncation rule");
  test->add_option("--variance", f.variance, "known or estimated");

  CLI::App* quant = app.add_subcommand("quantile", "Quantile of a limit law");
  common(quant);
  quant->add_option("--law", f.law, "normal, levy, xi, eta, talphah, stable_skew_neg, stable_half_skew_pos");
  quant->add_option("--p", f.p, "Probability");
  quant->add_option("--alpha", f.alpha, "Index of the law");
  quant->add_option("--h", f.h, "Limit of h_n");

  CLI::App* cfpdf = app.add_subcommand("cfpdf", "Density and CDF of a limit law by inversion");
  common(cfpdf);
  cfpdf->add_option("--law", f.law, "Law name (see quantile)");
  cfpdf->add_option("--alpha", f.alpha, "Index of the law");
  cfpdf->add_option("--h", f.h, "Limit of h_n");
  cfpdf->add_option("--x-min", f.x_min, "First grid point");
  cfpdf->add_option("--x-max", f.x_max, "Last grid point");
  cfpdf->add_option("--points", f.points, "Number of grid points");

  CLI::App* classify = app.add_subcommand("classify", "Regime of a truncation rule");
  common(classify);
  classify->add_option("--alpha0", f.alpha0, "Pareto tail index");
  classify->add_option("--rule", f.rules, "Truncation rule");
  classify->add_option("--n", f.n, "Grid of sample sizes")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const Settings settings(*chosen, load_config(f.config));
    if (chosen == tables) return cmd_tables(settings, f, out);
    if (chosen == simulate) return cmd_simulate(settings, f, out);
    if (chosen == test) return cmd_test(settings, f, out);
    if (chosen == quant) return cmd_quantile(settings, f, out);
    if (chosen == cfpdf) return cmd_cfpdf(settings, f, out);
    return cmd_classify(settings, f, out);
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const DegenerateSampleError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace truncmean
