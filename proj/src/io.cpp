#include "truncmean/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>

namespace truncmean {

namespace {

std::string slowly_varying_form_name(SlowlyVarying::Form form) {
  switch (form) {
    case SlowlyVarying::Form::Constant: return "constant";
    case SlowlyVarying::Form::LogPower: return "log_power";
    case SlowlyVarying::Form::LogLog: return "log_log";
  }
  return "?";
}

SlowlyVarying::Form slowly_varying_form(const std::string& name) {
  if (name == "constant") return SlowlyVarying::Form::Constant;
  if (name == "log_power") return SlowlyVarying::Form::LogPower;
  if (name == "log_log") return SlowlyVarying::Form::LogLog;
  throw ParameterError("unknown slowly varying form '" + name + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("config key '") + key + "': " + e.what());
  }
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ParameterError(std::string(what) + " must be a JSON object");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

json to_json(const TailModel& model) {
  json j;
  switch (model.kind()) {
    case ModelKind::Pareto: j["kind"] = "pareto"; break;
    case ModelKind::RegVarying: j["kind"] = "regvarying"; break;
    case ModelKind::Family: j["kind"] = to_string(*model.family_kind()); break;
  }
  j["alpha"] = model.alpha();
  j["support_min"] = model.support_min();
  if (const auto& sv = model.slowly_varying()) {
    j["slowly_varying"] = {{"form", slowly_varying_form_name(sv->form)},
                           {"theta", sv->theta},
                           {"tau", sv->tau},
                           {"reciprocal", sv->reciprocal}};
  }
  return j;
}

TailModel tail_model_from_json(const json& j) {
  require_object(j, "model");
  const auto kind = get_or<std::string>(j, "kind", "pareto");
  if (!j.contains("alpha")) throw ParameterError("model: missing 'alpha'");
  const double alpha = get_or<double>(j, "alpha", 0.0);
  if (kind == "pareto") return TailModel::pareto(alpha, get_or<double>(j, "support_min", 1.0));
  if (kind == "regvarying") {
    SlowlyVarying sv;
    if (j.contains("slowly_varying")) {
      const json& s = j.at("slowly_varying");
      require_object(s, "slowly_varying");
      sv.form = slowly_varying_form(get_or<std::string>(s, "form", "constant"));
      sv.theta = get_or<double>(s, "theta", 1.0);
      sv.tau = get_or<double>(s, "tau", 1.0);
      sv.reciprocal = get_or<bool>(s, "reciprocal", false);
    }
    return TailModel::regularly_varying(alpha, sv, get_or<double>(j, "support_min", 1.0));
  }
  if (kind == "family") return TailModel::family(family_from_string(get_or<std::string>(j, "family", "")), alpha);
  return TailModel::family(family_from_string(kind), alpha);
}

json to_json(const TruncationRule& rule) {
  using K = TruncationRule::Kind;
  json j;
  switch (rule.kind) {
    case K::LogN: j["kind"] = "log_n"; break;
    case K::Pow: j = {{"kind", "pow"}, {"p", rule.p}}; break;
    case K::PowOverLog: j = {{"kind", "pow_over_log"}, {"p", rule.p}, {"c", rule.c}}; break;
    case K::PowOverLog1p: j = {{"kind", "pow_over_log1p"}, {"p", rule.p}}; break;
    case K::PowLog1p: j = {{"kind", "pow_log1p"}, {"p", rule.p}, {"q", rule.q}}; break;
    case K::Table: {
      j["kind"] = "table";
      json table = json::object();
      for (const auto& [n, b] : rule.table) table[std::to_string(n)] = b;
      j["table"] = table;
      break;
    }
  }
  return j;
}

TruncationRule rule_from_json(const json& j) {
  if (j.is_string()) return parse_rule(j.get<std::string>());
  require_object(j, "rule");
  const auto kind = get_or<std::string>(j, "kind", "");
  if (kind == "log_n") return TruncationRule::log_n();
  if (kind == "pow") return TruncationRule::pow(get_or<double>(j, "p", 1.0));
  if (kind == "pow_over_log") {
    return TruncationRule::pow_over_log(get_or<double>(j, "p", 1.0), get_or<double>(j, "c", 1.0));
  }
  if (kind == "pow_over_log1p") return TruncationRule::pow_over_log1p(get_or<double>(j, "p", 1.0));
  if (kind == "pow_log1p") {
    return TruncationRule::pow_log1p(get_or<double>(j, "p", 1.0), get_or<double>(j, "q", 1.0));
  }
  if (kind == "table") {
    if (!j.contains("table") || !j.at("table").is_object()) {
      throw ParameterError("table rule needs a 'table' object of n: b pairs");
    }
    std::map<std::int64_t, double> table;
    for (const auto& [key, value] : j.at("table").items()) {
      try {
        table[std::stoll(key)] = value.get<double>();
      } catch (const std::exception&) {
        throw ParameterError("table rule entry '" + key + "' is not an integer size with a number");
      }
    }
    return TruncationRule::from_table(std::move(table));
  }
  throw ParameterError("unknown truncation rule kind '" + kind + "'");
}

json to_json(const SimPlan& plan) {
  json rules = json::array();
  for (const auto& r : plan.rules) rules.push_back(to_string(r));
  json modes = json::array();
  if (plan.known_var) modes.push_back("known");
  if (plan.estimated_var) modes.push_back("estimated");
  if (plan.stable_region) modes.push_back("stable");
  return {{"alpha0", plan.alpha0}, {"beta", plan.beta}, {"rules", rules}, {"n", plan.n_list},
          {"reps", plan.reps},     {"seed", plan.seed}, {"modes", modes},
          {"stable_scale", to_string(plan.stable_scale)}};
}

SimPlan plan_from_json(const json& j, SimPlan plan) {
  require_object(j, "plan");
  plan.alpha0 = get_or<double>(j, "alpha0", plan.alpha0);
  plan.beta = get_or<double>(j, "beta", plan.beta);
  plan.reps = get_or<std::int64_t>(j, "reps", plan.reps);
  plan.seed = get_or<std::uint64_t>(j, "seed", plan.seed);
  if (j.contains("n")) {
    const json& n = j.at("n");
    plan.n_list = n.is_array() ? get_or<std::vector<std::int64_t>>(j, "n", {})
                               : std::vector<std::int64_t>{get_or<std::int64_t>(j, "n", 0)};
  }
  if (j.contains("rules")) {
    if (!j.at("rules").is_array()) throw ParameterError("config key 'rules' must be an array");
    plan.rules.clear();
    for (const auto& r : j.at("rules")) plan.rules.push_back(rule_from_json(r));
  }
  if (j.contains("modes")) {
    const auto modes = get_or<std::vector<std::string>>(j, "modes", {});
    plan.known_var = plan.estimated_var = plan.stable_region = false;
    for (const auto& m : modes) {
      if (m == "known") {
        plan.known_var = true;
      } else if (m == "estimated") {
        plan.estimated_var = true;
      } else if (m == "stable") {
        plan.stable_region = true;
      } else {
        throw ParameterError("unknown simulation mode '" + m + "'");
      }
    }
  }
  if (j.contains("stable_scale")) {
    plan.stable_scale = stable_scale_from_string(get_or<std::string>(j, "stable_scale", ""));
  }
  return plan;
}

json to_json(const SimResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"rule", to_string(r.rule)},
                    {"n", r.n},
                    {"N", r.reps},
                    {"b", r.b},
                    {"mu0", r.mu0},
                    {"var1", r.var1},
                    {"count_o", r.count_o},
                    {"count", r.count},
                    {"count_tilde", r.count_tilde},
                    {"r_o", r.r_o},
                    {"r", r.r},
                    {"r_tilde", r.r_tilde},
                    {"se_o", r.se_o},
                    {"se", r.se},
                    {"se_tilde", r.se_tilde}});
  }
  return {{"plan", to_json(result.plan)}, {"stable_y", result.stable_y}, {"rows", rows}};
}

SimResult sim_result_from_json(const json& j) {
  require_object(j, "result");
  SimResult result;
  result.plan = plan_from_json(j.at("plan"));
  result.stable_y = j.at("stable_y").get<double>();
  for (const auto& r : j.at("rows")) {
    SimRow row;
    row.rule = rule_from_json(r.at("rule"));
    row.n = r.at("n").get<std::int64_t>();
    row.reps = r.at("N").get<std::int64_t>();
    row.b = r.at("b").get<double>();
    row.mu0 = r.at("mu0").get<double>();
    row.var1 = r.at("var1").get<double>();
    row.count_o = r.at("count_o").get<std::int64_t>();
    row.count = r.at("count").get<std::int64_t>();
    row.count_tilde = r.at("count_tilde").get<std::int64_t>();
    row.r_o = r.at("r_o").get<double>();
    row.r = r.at("r").get<double>();
    row.r_tilde = r.at("r_tilde").get<double>();
    row.se_o = r.at("se_o").get<double>();
    row.se = r.at("se").get<double>();
    row.se_tilde = r.at("se_tilde").get<double>();
    result.rows.push_back(row);
  }
  return result;
}

json to_json(const TestOutcome& o) {
  return {{"statistic", o.statistic},
          {"mu0", o.mu0},
          {"region", {o.region.lower_cut, o.region.upper_cut}},
          {"reject", o.reject},
          {"p_value", o.p_value},
          {"regime", to_string(o.regime)},
          {"z_quantile", o.z_quantile},
          {"n", o.n},
          {"b", o.b},
          {"mu_hat", o.mu_hat},
          {"B_hat", o.B_hat},
          {"var1", o.var1},
          {"variance_mode", to_string(o.variance_mode)}};
}

json to_json(const RegimeReport& report) {
  return {{"regime", to_string(report.regime)},
          {"n", report.n},
          {"b", report.b},
          {"h", report.h},
          {"drift_per_decade", report.drift_per_decade}};
}

LimitLaw law_from_name(const std::string& name, double alpha, double h) {
  if (name == "normal") return LimitLaw::normal();
  if (name == "levy") return LimitLaw::levy();
  if (name == "xi") return LimitLaw::xi(alpha, h);
  if (name == "eta") return LimitLaw::eta(alpha, h);
  if (name == "talphah") return LimitLaw::talphah(alpha, h);
  if (name == "stable_skew_neg") return LimitLaw::stable_skew_neg(alpha);
  if (name == "stable_half_skew_pos") return LimitLaw::stable_half_skew_pos(alpha);
  throw ParameterError("unknown law '" + name + "'");
}

std::string law_name(LimitLaw::Kind kind) {
  using K = LimitLaw::Kind;
  switch (kind) {
    case K::Normal: return "normal";
    case K::Levy: return "levy";
    case K::Xi: return "xi";
    case K::Eta: return "eta";
    case K::Talphah: return "talphah";
    case K::StableSkewNeg: return "stable_skew_neg";
    case K::StableHalfSkewPos: return "stable_half_skew_pos";
  }
  return "?";
}

std::vector<double> read_data_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string field = trim(line);
    if (field.empty()) continue;
    if (number == 1 && field == "x") continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(field, &used);
    } catch (const std::exception&) {
      throw DataError(number, "'" + field + "' is not a number");
    }
    if (used != field.size()) throw DataError(number, "'" + field + "' is not a number");
    if (!std::isfinite(value)) throw DataError(number, "value is not finite");
    if (value < 0.0) throw DataError(number, "negative value " + field);
    values.push_back(value);
  }
  if (values.empty()) throw DataError(number, "no data values");
  return values;
}

std::vector<double> read_data_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open data file '" + path + "'");
  return read_data_csv(in);
}

}  // namespace truncmean
