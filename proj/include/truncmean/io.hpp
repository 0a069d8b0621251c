#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "truncmean/distributions.hpp"
#include "truncmean/error.hpp"
#include "truncmean/limits.hpp"
#include "truncmean/montecarlo.hpp"
#include "truncmean/testing.hpp"
#include "truncmean/truncation.hpp"

namespace truncmean {

using json = nlohmann::json;

/// Malformed data file; `line` is 1-based.
class DataError : public ParameterError {
 public:
  DataError(int line, const std::string& message)
      : ParameterError("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// {kind: pareto|regvarying|f|g|h|p|q, alpha, support_min, slowly_varying: {form, theta, tau, reciprocal}}
json to_json(const TailModel& model);
TailModel tail_model_from_json(const json& j);

/// Either the textual form accepted by parse_rule or {kind, p, c, q, table}.
json to_json(const TruncationRule& rule);
TruncationRule rule_from_json(const json& j);

/// {alpha0, beta, rules, n, reps, seed, modes, stable_scale}; absent keys keep `defaults`.
json to_json(const SimPlan& plan);
SimPlan plan_from_json(const json& j, SimPlan defaults = {});

json to_json(const SimResult& result);
SimResult sim_result_from_json(const json& j);

json to_json(const TestOutcome& outcome);
json to_json(const RegimeReport& report);

/// Law name as used on the command line: normal, levy, xi, eta, talphah,
/// stable_skew_neg, stable_half_skew_pos.
LimitLaw law_from_name(const std::string& name, double alpha, double h);
std::string law_name(LimitLaw::Kind kind);

/// One nonnegative finite value per line; an optional first line "x"; blank lines skipped.
std::vector<double> read_data_csv(std::istream& in);
std::vector<double> read_data_csv_file(const std::string& path);

}  // namespace truncmean
