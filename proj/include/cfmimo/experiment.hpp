// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmimo/lsfd.hpp"

namespace cfmimo {

/// One swept scenario parameter, optionally with a second parameter tied to
/// it by a constant product (e.g. L * N = 800).
struct SweepSpec {
  std::string parameter;  ///< N, L, tau_p or K
  std::vector<int> values;
  std::string coupled;    ///< empty when uncoupled
  int product = 0;
};

struct ExperimentSpec {
  ScenarioConfig scenario;
  std::vector<Scheme> schemes;
  std::vector<Method> methods{Method::monte_carlo};
  std::vector<PowerMode> power_modes{PowerMode::full};
  double fractional_exponent = 1.0;
  int drops = 50;
  double alpha = 0.8;
  std::optional<SweepSpec> sweep;
  std::string output_path;
  double tolerance = 0.02;  ///< validate: maximum allowed per-UE relative deviation
};

/// Parses and validates a spec document. Unknown keys are rejected.
ExperimentSpec parse_spec(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::string& path);

/// Scenario of one sweep point (the base scenario when not sweeping).
struct SweepPoint {
  ScenarioConfig scenario;
  std::optional<int> value;
};
std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec);

struct SERow {
  int drop = 0;
  int ue = 0;
  Scheme scheme = Scheme::MR;
  Method method = Method::monte_carlo;
  PowerMode power_mode = PowerMode::full;
  double sinr = 0.0;
  double se = 0.0;
  std::optional<int> sweep_value;
};

/// Every requested (scheme, method) pair that has an evaluator; Monte Carlo
/// applies to every scheme, closed-form to FZF/PFZF/PWPFZF, asymptotic to mLRZF.
bool method_applies(Scheme scheme, Method method);

std::vector<SERow> run_experiment(const ExperimentSpec& spec, const MomentOptions& options = {});
void write_rows(std::ostream& out, const std::vector<SERow>& rows, const std::string& sweep_parameter);

struct ValidationRow {
  int drop = 0;
  int ue = 0;
  Scheme scheme = Scheme::MR;
  PowerMode power_mode = PowerMode::full;
  double se_closed = 0.0;
  double se_mc = 0.0;
  double deviation = 0.0;  ///< |se_mc - se_closed| / se_closed
  std::optional<int> sweep_value;
};

std::vector<ValidationRow> validate_experiment(const ExperimentSpec& spec, const MomentOptions& options = {});
void write_validation(std::ostream& out, const std::vector<ValidationRow>& rows, const std::string& sweep_parameter);

/// Linear interpolation between order statistics at position q (n - 1).
double percentile(std::vector<double> values, double q);

struct SummaryRow {
  std::string scheme;
  std::string method;
  std::string power_mode;
  std::string sweep_value;  ///< empty when the input has no sweep column
  long count = 0;
  double mean_se = 0.0;
  double p5_se = 0.0;          ///< 95%-likely SE
  std::vector<double> cdf;     ///< quantiles 0, 0.05, ..., 1
};

struct Summary {
  std::string sweep_parameter;
  std::vector<SummaryRow> rows;
};

/// Reads a run CSV. Malformed rows raise ConfigError naming the line.
Summary summarize(std::istream& in);
void write_summary(std::ostream& out, const Summary& summary);

}  // namespace cfmimo
