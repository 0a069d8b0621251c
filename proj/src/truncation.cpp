#include "truncmean/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "truncmean/error.hpp"

namespace truncmean {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParameterError(context + ": '" + text + "' is not a number");
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw ParameterError(context + ": '" + text + "' is not a finite number");
  }
  return value;
}

std::string fmt(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void check_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string(what) + " must be positive");
}

}  // namespace

TruncationRule TruncationRule::pow(double p) {
  check_positive(p, "rule exponent");
  TruncationRule r;
  r.kind = Kind::Pow;
  r.p = p;
  return r;
}

TruncationRule TruncationRule::pow_over_log(double p, double c) {
  check_positive(p, "rule exponent");
  check_positive(c, "rule constant");
  TruncationRule r;
  r.kind = Kind::PowOverLog;
  r.p = p;
  r.c = c;
  return r;
}

TruncationRule TruncationRule::pow_over_log1p(double p) {
  check_positive(p, "rule exponent");
  TruncationRule r;
  r.kind = Kind::PowOverLog1p;
  r.p = p;
  return r;
}

TruncationRule TruncationRule::pow_log1p(double p, double q) {
  check_positive(p, "rule exponent");
  if (!std::isfinite(q)) throw ParameterError("rule log exponent must be finite");
  TruncationRule r;
  r.kind = Kind::PowLog1p;
  r.p = p;
  r.q = q;
  return r;
}

TruncationRule TruncationRule::from_table(std::map<std::int64_t, double> table) {
  if (table.empty()) throw ParameterError("rule table is empty");
  for (const auto& [n, b] : table) {
    if (n < 2) throw ParameterError("rule table sizes must be at least 2");
    check_positive(b, "rule table threshold");
  }
  TruncationRule r;
  r.kind = Kind::Table;
  r.table = std::move(table);
  return r;
}

std::vector<TruncationRule> TruncationRule::table_rules() {
  return {log_n(),
          pow(0.5),
          pow(1.0),
          pow_over_log(4.0 / 3.0, 10.0),
          pow(1.5),
          pow(1.8),
          pow_over_log1p(2.0)};
}

TruncationRule parse_rule(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty()) throw ParameterError("empty truncation rule");
  const std::string& kind = parts[0];
  const auto expect = [&](std::size_t count) {
    if (parts.size() != count) {
      throw ParameterError("rule '" + text + "': expected " + std::to_string(count - 1) +
                           " parameter(s)");
    }
  };
  if (kind == "log_n" || kind == "log") {
    expect(1);
    return TruncationRule::log_n();
  }
  if (kind == "pow") {
    expect(2);
    return TruncationRule::pow(parse_number(parts[1], "rule"));
  }
  if (kind == "pow_over_log") {
    expect(3);
    return TruncationRule::pow_over_log(parse_number(parts[1], "rule"),
                                        parse_number(parts[2], "rule"));
  }
  if (kind == "pow_over_log1p") {
    expect(2);
    return TruncationRule::pow_over_log1p(parse_number(parts[1], "rule"));
  }
  if (kind == "pow_log1p") {
    expect(3);
    return TruncationRule::pow_log1p(parse_number(parts[1], "rule"),
                                     parse_number(parts[2], "rule"));
  }
  if (kind == "table") {
    expect(2);
    std::map<std::int64_t, double> table;
    for (const auto& entry : split(parts[1], ',')) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw ParameterError("rule table entry '" + entry + "' lacks '='");
      const double n = parse_number(entry.substr(0, eq), "rule table");
      if (n != std::floor(n)) throw ParameterError("rule table size must be an integer");
      table[static_cast<std::int64_t>(n)] = parse_number(entry.substr(eq + 1), "rule table");
    }
    return TruncationRule::from_table(std::move(table));
  }
  throw ParameterError("unknown truncation rule kind '" + kind + "'");
}

std::string to_string(const TruncationRule& rule) {
  using K = TruncationRule::Kind;
  switch (rule.kind) {
    case K::LogN: return "log_n";
    case K::Pow: return "pow:" + fmt(rule.p, 17);
    case K::PowOverLog: return "pow_over_log:" + fmt(rule.p, 17) + ":" + fmt(rule.c, 17);
    case K::PowOverLog1p: return "pow_over_log1p:" + fmt(rule.p, 17);
    case K::PowLog1p: return "pow_log1p:" + fmt(rule.p, 17) + ":" + fmt(rule.q, 17);
    case K::Table: {
      std::string out = "table:";
      bool first = true;
      for (const auto& [n, b] : rule.table) {
        if (!first) out += ",";
        out += std::to_string(n) + "=" + fmt(b, 17);
        first = false;
      }
      return out;
    }
  }
  return "?";
}

std::string label(const TruncationRule& rule) {
  using K = TruncationRule::Kind;
  switch (rule.kind) {
    case K::LogN: return "log n";
    case K::Pow: return "n^" + fmt(rule.p, 6);
    case K::PowOverLog: return "n^" + fmt(rule.p, 6) + "/(" + fmt(rule.c, 6) + " log n)";
    case K::PowOverLog1p: return "n^" + fmt(rule.p, 6) + "/log(1+n)";
    case K::PowLog1p: return "n^" + fmt(rule.p, 6) + " log(1+n)^" + fmt(rule.q, 6);
    case K::Table: return "table";
  }
  return "?";
}

double truncation_value(const TruncationRule& rule, std::int64_t n) {
  if (n < 2) throw DomainError("truncation_value: n must be at least 2");
  const double x = static_cast<double>(n);
  using K = TruncationRule::Kind;
  switch (rule.kind) {
    case K::LogN: return std::log(x);
    case K::Pow: return std::pow(x, rule.p);
    case K::PowOverLog: return std::pow(x, rule.p) / (rule.c * std::log(x));
    case K::PowOverLog1p: return std::pow(x, rule.p) / std::log1p(x);
    case K::PowLog1p: return std::pow(x, rule.p) * std::pow(std::log1p(x), rule.q);
    case K::Table: {
      const auto it = rule.table.find(n);
      if (it == rule.table.end()) {
        throw DomainError("truncation_value: table rule has no entry for n = " + std::to_string(n));
      }
      return it->second;
    }
  }
  return 0.0;
}

TruncatedStats truncated_stats(std::span<const double> sample, double b,
                               std::span<const double> mu_k, const TailModel* model) {
  if (sample.empty()) throw DomainError("truncated_stats: empty sample");
  if (!(b > 0.0)) throw DomainError("truncated_stats: b must be positive");
  if (mu_k.size() != sample.size()) {
    throw DomainError("truncated_stats: mu_k length differs from the sample length");
  }
  const auto n = static_cast<std::int64_t>(sample.size());
  const auto cut = [b](double x) { return x <= b ? x : 0.0; };

  double sum = 0.0;
  double mu_mean = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    sum += cut(sample[k]);
    mu_mean += mu_k[k];
  }
  TruncatedStats s;
  s.n = n;
  s.b = b;
  s.mu_hat = sum / static_cast<double>(n);
  mu_mean /= static_cast<double>(n);

  double centered = 0.0;
  double xi = 0.0;
  double eta = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double y = cut(sample[k]);
    centered += (y - s.mu_hat) * (y - s.mu_hat);
    xi += y - mu_k[k];
    eta += (y - mu_mean) * (y - mu_mean);
  }
  s.B_hat = std::sqrt(centered);
  s.xi_n = xi / b;
  s.eta_n = eta / (b * b);

  if (model != nullptr) {
    const double tail = model->survival(b);
    s.h_n = static_cast<double>(n) * tail;
    for (int m = 1; m <= 4; ++m) {
      if (m > model->alpha()) {
        s.h_n_m[m] = model->alpha() / (m - model->alpha()) * *s.h_n;
      }
    }
  }
  return s;
}

TruncatedStats truncated_stats(std::span<const double> sample, double b, double mu0,
                               const TailModel* model) {
  const std::vector<double> mu_k(sample.size(), mu0);
  return truncated_stats(sample, b, mu_k, model);
}

std::string stats_csv_header() { return "n,b,mu_hat,B_hat,xi_n,eta_n,h_n"; }

std::string stats_csv_row(const TruncatedStats& s) {
  return std::to_string(s.n) + "," + fmt(s.b, 6) + "," + fmt(s.mu_hat, 6) + "," + fmt(s.B_hat, 6) +
         "," + fmt(s.xi_n, 6) + "," + fmt(s.eta_n, 6) + "," + (s.h_n ? fmt(*s.h_n, 6) : "");
}

double critical_sequence(const TailModel& model, std::int64_t n, double h) {
  const double nd = static_cast<double>(n);
  if (!(h > 0.0 && h < nd)) throw DomainError("critical_sequence: need 0 < h < n");
  switch (model.kind()) {
    case ModelKind::Pareto:
      return model.support_min() * std::exp(std::log(nd / h) / model.alpha());
    case ModelKind::Family:
      return model.upper_quantile(h / nd);
    case ModelKind::RegVarying: {
      const auto& L = *model.slowly_varying();
      const double inv_alpha = 1.0 / model.alpha();
      double x = std::max(model.tail_start(), std::exp(std::log(nd / h) * inv_alpha));
      for (int iter = 0; iter < 200; ++iter) {
        const double next = std::exp(inv_alpha * std::log(nd * L(x) / h));
        if (!std::isfinite(next) || !(next > 0.0)) break;
        const bool done = std::abs(next - x) <= 1e-8 * next;
        x = next;
        if (done) {
          // A fixed point below the decreasing part is not a survival crossing.
          return x >= model.tail_start() ? x : model.upper_quantile(h / nd);
        }
      }
      throw NumericError("critical_sequence: fixed-point iteration did not converge in 200 steps");
    }
  }
  return 0.0;
}

std::vector<double> critical_sequence(std::span<const TailModel> models, double h) {
  const double nd = static_cast<double>(models.size());
  if (!(h > 0.0 && h < nd)) throw DomainError("critical_sequence: need 0 < h < n");
  std::vector<double> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(m.upper_quantile(h / nd));
  return out;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::SubCritical: return "SubCritical";
    case Regime::Critical: return "Critical";
    case Regime::SuperCritical: return "SuperCritical";
    case Regime::Inconclusive: return "Inconclusive";
  }
  return "?";
}

RegimeReport classify_rule_report(const TruncationRule& rule, const TailModel& model,
                                  std::span<const std::int64_t> n_grid) {
  if (n_grid.size() < 4) throw DomainError("classify_rule: need at least four grid sizes");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("classify_rule: grid must increase");
  }
  RegimeReport r;
  for (auto n : n_grid) {
    const double b = truncation_value(rule, n);
    r.n.push_back(n);
    r.b.push_back(b);
    r.h.push_back(static_cast<double>(n) * model.survival(b));
  }
  const std::size_t last = r.h.size() - 1;
  const double decades = std::log10(static_cast<double>(r.n[last]) / static_cast<double>(r.n[last - 1]));
  const double h_last = r.h[last];
  const double h_prev = r.h[last - 1];
  if (h_prev > 0.0 && h_last > 0.0) {
    r.drift_per_decade = std::abs(std::pow(h_last / h_prev, 1.0 / decades) - 1.0);
  } else {
    r.drift_per_decade = (h_prev == h_last) ? 0.0 : 1.0;
  }

  const bool in_band = std::all_of(r.h.begin(), r.h.end(), [](double h) {
    return h >= kCriticalLow && h <= kCriticalHigh;
  });
  bool increasing = true;
  bool decreasing = true;
  for (std::size_t i = 1; i < r.h.size(); ++i) {
    if (!(r.h[i] > r.h[i - 1])) increasing = false;
    if (!(r.h[i] < r.h[i - 1])) decreasing = false;
  }
  const bool drifting = r.drift_per_decade >= kDriftLimit;

  if (in_band && !drifting) {
    r.regime = Regime::Critical;
  } else if (increasing && (h_last > kCriticalHigh || drifting)) {
    r.regime = Regime::SubCritical;
  } else if (decreasing && (h_last < kCriticalLow || drifting)) {
    r.regime = Regime::SuperCritical;
  } else {
    r.regime = Regime::Inconclusive;
  }
  return r;
}

Regime classify_rule(const TruncationRule& rule, const TailModel& model,
                     std::span<const std::int64_t> n_grid) {
  return classify_rule_report(rule, model, n_grid).regime;
}

}  // namespace truncmean
