// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "cfmimo/closedform.hpp"

namespace cfmimo {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

const json& object_at(const json& doc, const char* key, const std::string& where) {
  const json& v = doc.at(key);
  if (!v.is_object()) throw ConfigError(where, "must be an object");
  return v;
}

template <class T>
void read(const json& obj, const char* key, T& into, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string field = where.empty() ? key : where + "." + key;
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(field, "must be a number");
    into = v.get<double>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_unsigned()) throw ConfigError(field, "must be a non-negative integer");
    into = v.get<std::uint64_t>();
  } else if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
    const auto x = v.get<long long>();
    if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(field, "out of range");
    into = static_cast<int>(x);
  } else {
    if (!v.is_string()) throw ConfigError(field, "must be a string");
    into = v.get<std::string>();
  }
}

std::vector<std::string> string_list(const json& v, const std::string& field) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const json& e : v) {
      if (!e.is_string()) throw ConfigError(field, "entries must be strings");
      out.push_back(e.get<std::string>());
    }
  } else {
    throw ConfigError(field, "must be a string or a list of strings");
  }
  if (out.empty()) throw ConfigError(field, "must not be empty");
  return out;
}

ScenarioConfig parse_scenario(const json& s) {
  reject_unknown(s, "scenario",
                 {"L", "N", "K", "tau_p", "tau_c", "area_m", "p_max_W", "p_pilot_W", "noise_dBm", "pathloss",
                  "v_percent", "seed", "trials"});
  ScenarioConfig c;
  read(s, "L", c.L, "scenario");
  read(s, "N", c.N, "scenario");
  read(s, "K", c.K, "scenario");
  read(s, "tau_p", c.tau_p, "scenario");
  read(s, "tau_c", c.tau_c, "scenario");
  read(s, "area_m", c.area_m, "scenario");
  read(s, "p_max_W", c.p_max_W, "scenario");
  c.p_pilot_W = c.p_max_W;
  read(s, "p_pilot_W", c.p_pilot_W, "scenario");
  read(s, "noise_dBm", c.noise_dBm, "scenario");
  read(s, "v_percent", c.v_percent, "scenario");
  read(s, "seed", c.seed, "scenario");
  read(s, "trials", c.trials, "scenario");
  if (s.contains("pathloss")) {
    const json& p = object_at(s, "pathloss", "scenario.pathloss");
    reject_unknown(p, "scenario.pathloss", {"offset_dB", "exponent", "shadow_sigma_dB"});
    read(p, "offset_dB", c.pathloss.offset_dB, "scenario.pathloss");
    read(p, "exponent", c.pathloss.exponent, "scenario.pathloss");
    read(p, "shadow_sigma_dB", c.pathloss.shadow_sigma_dB, "scenario.pathloss");
  }
  return c;
}

int& sweep_field(ScenarioConfig& c, const std::string& name) {
  if (name == "N") return c.N;
  if (name == "L") return c.L;
  if (name == "tau_p") return c.tau_p;
  if (name == "K") return c.K;
  throw ConfigError("sweep.parameter", "must be one of N, L, tau_p, K (got '" + name + "')");
}

bool any_zf(const std::vector<Scheme>& schemes) {
  return std::any_of(schemes.begin(), schemes.end(), is_zf_family);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string point_label(const ExperimentSpec& spec, const SweepPoint& p) {
  if (!spec.sweep) return "";
  return spec.sweep->parameter + "=" + std::to_string(*p.value);
}

}  // namespace

bool method_applies(Scheme scheme, Method method) {
  switch (method) {
    case Method::monte_carlo: return true;
    case Method::closed_form: return is_zf_family(scheme);
    case Method::asymptotic: return scheme == Scheme::mLRZF;
  }
  return false;
}

ExperimentSpec parse_spec(const json& doc) {
  if (!doc.is_object()) throw ConfigError("spec", "must be a JSON object");
  reject_unknown(doc, "", {"scenario", "schemes", "methods", "power_mode", "fractional_exponent", "drops", "alpha",
                           "sweep", "output_path", "tolerance"});
  ExperimentSpec spec;
  if (!doc.contains("scenario")) throw ConfigError("scenario", "missing");
  spec.scenario = parse_scenario(object_at(doc, "scenario", "scenario"));
  if (!doc.contains("schemes")) throw ConfigError("schemes", "missing");
  for (const auto& s : string_list(doc.at("schemes"), "schemes")) spec.schemes.push_back(parse_scheme(s));
  if (doc.contains("methods")) {
    spec.methods.clear();
    for (const auto& m : string_list(doc.at("methods"), "methods")) spec.methods.push_back(parse_method(m));
  }
  if (doc.contains("power_mode")) {
    spec.power_modes.clear();
    for (const auto& m : string_list(doc.at("power_mode"), "power_mode")) spec.power_modes.push_back(parse_power_mode(m));
  }
  read(doc, "fractional_exponent", spec.fractional_exponent, "");
  read(doc, "drops", spec.drops, "");
  read(doc, "alpha", spec.alpha, "");
  read(doc, "output_path", spec.output_path, "");
  read(doc, "tolerance", spec.tolerance, "");
  if (doc.contains("sweep")) {
    const json& s = object_at(doc, "sweep", "sweep");
    reject_unknown(s, "sweep", {"parameter", "values", "coupling"});
    SweepSpec sw;
    if (!s.contains("parameter")) throw ConfigError("sweep.parameter", "missing");
    read(s, "parameter", sw.parameter, "sweep");
    if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty())
      throw ConfigError("sweep.values", "must be a non-empty list of integers");
    for (const json& v : s.at("values")) {
      if (!v.is_number_integer()) throw ConfigError("sweep.values", "must be integers");
      sw.values.push_back(v.get<int>());
    }
    if (s.contains("coupling")) {
      const json& c = object_at(s, "coupling", "sweep.coupling");
      reject_unknown(c, "sweep.coupling", {"parameter", "product"});
      read(c, "parameter", sw.coupled, "sweep.coupling");
      read(c, "product", sw.product, "sweep.coupling");
      if (sw.coupled.empty()) throw ConfigError("sweep.coupling.parameter", "missing");
      if (sw.coupled == sw.parameter) throw ConfigError("sweep.coupling.parameter", "must differ from sweep.parameter");
      if (sw.product < 1) throw ConfigError("sweep.coupling.product", "must be >= 1");
    }
    spec.sweep = sw;
  }

  if (spec.drops < 1) throw ConfigError("drops", "must be >= 1");
  if (!(spec.alpha > 0.0)) throw ConfigError("alpha", "must be > 0");
  if (!(spec.fractional_exponent >= 0.0)) throw ConfigError("fractional_exponent", "must be >= 0");
  if (!(spec.tolerance > 0.0)) throw ConfigError("tolerance", "must be > 0");
  for (Method m : spec.methods) {
    if (std::none_of(spec.schemes.begin(), spec.schemes.end(), [m](Scheme s) { return method_applies(s, m); }))
      throw ConfigError("methods", "'" + std::string(to_string(m)) + "' applies to none of the requested schemes");
  }
  // Every sweep point is checked before anything runs.
  for (const SweepPoint& p : sweep_points(spec)) {
    try {
      p.scenario.validate(any_zf(spec.schemes));
    } catch (const ConfigError& e) {
      if (!spec.sweep) throw;
      throw ConfigError(e.field(), std::string("sweep point ") + point_label(spec, p) + ": " + e.what());
    }
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("spec", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("spec", std::string("invalid JSON: ") + e.what());
  }
  return parse_spec(doc);
}

std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec) {
  if (!spec.sweep) return {{spec.scenario, std::nullopt}};
  std::vector<SweepPoint> out;
  for (int v : spec.sweep->values) {
    SweepPoint p{spec.scenario, v};
    sweep_field(p.scenario, spec.sweep->parameter) = v;
    if (!spec.sweep->coupled.empty()) {
      if (v < 1 || spec.sweep->product % v != 0)
        throw ConfigError("sweep.coupling.product", "not divisible by sweep value " + std::to_string(v));
      sweep_field(p.scenario, spec.sweep->coupled) = spec.sweep->product / v;
    }
    out.push_back(p);
  }
  return out;
}

namespace {

// Per-drop evaluation shared by run and validate. Monte-Carlo moments of
// schemes whose combiners ignore the data powers are computed once per drop
// and reused for every power mode; they are identical either way because the
// network, pilots, pilot powers and trial streams do not depend on the mode.
class DropEvaluator {
public:
  DropEvaluator(const ExperimentSpec& spec, const ScenarioConfig& cfg, int drop, const MomentOptions& options)
      : spec_(spec), cfg_(cfg), drop_(drop), options_(options) {
    options_.drop = static_cast<std::uint64_t>(drop);
  }

  const SystemState& system(PowerMode mode) {
    auto it = systems_.find(mode);
    if (it == systems_.end()) {
      SystemState s = make_system(cfg_, mode, spec_.fractional_exponent, static_cast<std::uint64_t>(drop_));
      s.alpha = spec_.alpha;
      it = systems_.emplace(mode, std::move(s)).first;
    }
    return it->second;
  }

  SEReport monte_carlo(Scheme scheme, PowerMode mode, const std::vector<Scheme>& mc_schemes) {
    const SystemState& sys = system(mode);
    if (scheme == Scheme::LRZF) {
      auto it = lrzf_.find(mode);
      if (it == lrzf_.end()) it = lrzf_.emplace(mode, accumulate_moments(sys, {Scheme::LRZF}, cfg_.trials, options_)[0]).first;
      return monte_carlo_report(it->second, sys, sys.power.p_ul, mode);
    }
    if (shared_.empty()) {
      std::vector<Scheme> shared;
      for (Scheme s : mc_schemes)
        if (s != Scheme::LRZF) shared.push_back(s);
      const SystemState& base = system(PowerMode::full);
      const auto moments = accumulate_moments(base, shared, cfg_.trials, options_);
      for (std::size_t i = 0; i < shared.size(); ++i) shared_.emplace(shared[i], moments[i]);
    }
    return monte_carlo_report(shared_.at(scheme), sys, sys.power.p_ul, mode);
  }

  SEReport closed_form(Scheme scheme, PowerMode mode) {
    const SystemState& sys = system(mode);
    return closed_form_report(scheme, sys, sys.power.p_ul, mode);
  }

private:
  const ExperimentSpec& spec_;
  ScenarioConfig cfg_;
  int drop_;
  MomentOptions options_;
  std::map<PowerMode, SystemState> systems_;
  std::map<Scheme, GMoments> shared_;
  std::map<PowerMode, GMoments> lrzf_;
};

template <class F>
auto at_point(const ExperimentSpec& spec, const SweepPoint& p, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (!spec.sweep) throw;
    throw ConfigError(e.field(), std::string("sweep point ") + point_label(spec, p) + ": " + e.what());
  } catch (const NumericalError& e) {
    if (!spec.sweep) throw;
    throw NumericalError(std::string("sweep point ") + point_label(spec, p) + ": " + e.what());
  }
}

}  // namespace

std::vector<SERow> run_experiment(const ExperimentSpec& spec, const MomentOptions& options) {
  std::vector<SERow> rows;
  std::vector<Scheme> mc_schemes;
  if (std::find(spec.methods.begin(), spec.methods.end(), Method::monte_carlo) != spec.methods.end())
    mc_schemes = spec.schemes;
  for (const SweepPoint& point : sweep_points(spec)) {
    at_point(spec, point, [&] {
      for (int drop = 0; drop < spec.drops; ++drop) {
        DropEvaluator eval(spec, point.scenario, drop, options);
        for (PowerMode mode : spec.power_modes) {
          for (Scheme scheme : spec.schemes) {
            for (Method method : spec.methods) {
              if (!method_applies(scheme, method)) continue;
              const SEReport r = method == Method::monte_carlo ? eval.monte_carlo(scheme, mode, mc_schemes)
                                                               : eval.closed_form(scheme, mode);
              for (int k = 0; k < r.se.size(); ++k)
                rows.push_back({drop, k, scheme, method, mode, r.sinr(k), r.se(k), point.value});
            }
          }
        }
      }
      return 0;
    });
  }
  return rows;
}

void write_rows(std::ostream& out, const std::vector<SERow>& rows, const std::string& sweep_parameter) {
  out << "drop,ue,scheme,method,power_mode,sinr,se";
  if (!sweep_parameter.empty()) out << ',' << sweep_parameter;
  out << '\n';
  for (const SERow& r : rows) {
    out << r.drop << ',' << r.ue << ',' << to_string(r.scheme) << ',' << to_string(r.method) << ','
        << to_string(r.power_mode) << ',' << fmt(r.sinr) << ',' << fmt(r.se);
    if (!sweep_parameter.empty()) out << ',' << (r.sweep_value ? std::to_string(*r.sweep_value) : "");
    out << '\n';
  }
}

std::vector<ValidationRow> validate_experiment(const ExperimentSpec& spec, const MomentOptions& options) {
  std::vector<Scheme> schemes;
  for (Scheme s : spec.schemes)
    if (is_zf_family(s)) schemes.push_back(s);
  if (schemes.empty()) throw ConfigError("schemes", "validate needs at least one of FZF, PFZF, PWPFZF");
  std::vector<ValidationRow> rows;
  for (const SweepPoint& point : sweep_points(spec)) {
    at_point(spec, point, [&] {
      for (int drop = 0; drop < spec.drops; ++drop) {
        DropEvaluator eval(spec, point.scenario, drop, options);
        for (PowerMode mode : spec.power_modes) {
          for (Scheme scheme : schemes) {
            const SEReport cf = eval.closed_form(scheme, mode);
            const SEReport mc = eval.monte_carlo(scheme, mode, schemes);
            for (int k = 0; k < cf.se.size(); ++k) {
              const double dev = std::abs(mc.se(k) - cf.se(k)) / cf.se(k);
              rows.push_back({drop, k, scheme, mode, cf.se(k), mc.se(k), dev, point.value});
            }
          }
        }
      }
      return 0;
    });
  }
  return rows;
}

void write_validation(std::ostream& out, const std::vector<ValidationRow>& rows, const std::string& sweep_parameter) {
  out << "drop,ue,scheme,power_mode,se_closed,se_mc,deviation";
  if (!sweep_parameter.empty()) out << ',' << sweep_parameter;
  out << '\n';
  for (const ValidationRow& r : rows) {
    out << r.drop << ',' << r.ue << ',' << to_string(r.scheme) << ',' << to_string(r.power_mode) << ','
        << fmt(r.se_closed) << ',' << fmt(r.se_mc) << ',' << fmt(r.deviation);
    if (!sweep_parameter.empty()) out << ',' << (r.sweep_value ? std::to_string(*r.sweep_value) : "");
    out << '\n';
  }
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("values", "percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q", "must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, long line, const char* what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(x))
    throw ConfigError("csv", "line " + std::to_string(line) + ": " + what + " is not a number ('" + s + "')");
  return x;
}

}  // namespace

Summary summarize(std::istream& in) {
  static const std::vector<std::string> kColumns{"drop", "ue", "scheme", "method", "power_mode", "sinr", "se"};
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv", "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < kColumns.size() || header.size() > kColumns.size() + 1 ||
      !std::equal(kColumns.begin(), kColumns.end(), header.begin()))
    throw ConfigError("csv", "line 1: header must be " + std::string("drop,ue,scheme,method,power_mode,sinr,se[,sweep]"));
  Summary out;
  const bool swept = header.size() == kColumns.size() + 1;
  if (swept) out.sweep_parameter = header.back();

  std::vector<std::vector<double>> samples;
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::size_t> index;
  long number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size())
      throw ConfigError("csv", "line " + std::to_string(number) + ": expected " + std::to_string(header.size()) +
                                   " fields, got " + std::to_string(f.size()));
    const double drop = parse_number(f[0], number, "drop");
    const double ue = parse_number(f[1], number, "ue");
    if (drop < 0 || ue < 0 || drop != std::floor(drop) || ue != std::floor(ue))
      throw ConfigError("csv", "line " + std::to_string(number) + ": drop and ue must be non-negative integers");
    try {
      parse_scheme(f[2]);
      parse_method(f[3]);
      parse_power_mode(f[4]);
    } catch (const ConfigError& e) {
      throw ConfigError("csv", "line " + std::to_string(number) + ": " + e.what());
    }
    const double sinr = parse_number(f[5], number, "sinr");
    const double se = parse_number(f[6], number, "se");
    if (sinr < 0.0 || se < 0.0) throw ConfigError("csv", "line " + std::to_string(number) + ": negative sinr or se");
    std::string sweep;
    if (swept) {
      parse_number(f[7], number, out.sweep_parameter.c_str());
      sweep = f[7];
    }
    const auto key = std::make_tuple(f[2], f[3], f[4], sweep);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.rows.size()).first;
      out.rows.push_back({f[2], f[3], f[4], sweep, 0, 0.0, 0.0, {}});
      samples.emplace_back();
    }
    samples[it->second].push_back(se);
  }
  for (std::size_t g = 0; g < out.rows.size(); ++g) {
    SummaryRow& r = out.rows[g];
    const auto& v = samples[g];
    r.count = static_cast<long>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    r.mean_se = sum / static_cast<double>(v.size());
    r.p5_se = percentile(v, 0.05);
    for (int q = 0; q <= 20; ++q) r.cdf.push_back(percentile(v, q / 20.0));
  }
  return out;
}

void write_summary(std::ostream& out, const Summary& summary) {
  out << "scheme,method,power_mode";
  if (!summary.sweep_parameter.empty()) out << ',' << summary.sweep_parameter;
  out << ",count,mean_se,p5_se";
  for (int q = 0; q <= 100; q += 5) out << ",q" << q;
  out << '\n';
  for (const SummaryRow& r : summary.rows) {
    out << r.scheme << ',' << r.method << ',' << r.power_mode;
    if (!summary.sweep_parameter.empty()) out << ',' << r.sweep_value;
    out << ',' << r.count << ',' << fmt(r.mean_se) << ',' << fmt(r.p5_se);
    for (double x : r.cdf) out << ',' << fmt(x);
    out << '\n';
  }
}

}  // namespace cfmimo
