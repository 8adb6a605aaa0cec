// SPDX-License-Identifier: Apache-2.0
// Command-line front end: run, validate and summarize experiments.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfmimo/experiment.hpp"

namespace {

int fail(const char* type, const std::string& message, const std::string& field = "") {
  nlohmann::json err{{"error", {{"type", type}, {"message", message}}}};
  if (!field.empty()) err["error"]["field"] = field;
  std::cerr << err.dump() << '\n';
  return type == std::string("validation") ? 3 : 2;
}

// "-" or empty writes to stdout.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cfmimo::ConfigError("output_path", "cannot open '" + path + "' for writing");
  write(out);
  if (!out) throw cfmimo::ConfigError("output_path", "write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO uplink SE simulator"};
  app.require_subcommand(1);

  std::string spec_path, csv_path, output;
  int workers = 0;

  auto* run = app.add_subcommand("run", "Run an experiment and write per-UE SE rows as CSV");
  run->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("-o,--output", output, "Output CSV (default: spec output_path, else stdout)");
  run->add_option("-w,--workers", workers, "Worker threads (default: CFMIMO_WORKERS or all cores)");

  auto* validate = app.add_subcommand("validate", "Compare closed-form and Monte-Carlo SE per UE");
  validate->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  validate->add_option("-o,--output", output, "Output CSV (default: stdout)");
  validate->add_option("-w,--workers", workers, "Worker threads (default: CFMIMO_WORKERS or all cores)");

  auto* summarize = app.add_subcommand("summarize", "Mean, 95%-likely SE and CDF per group of a run CSV");
  summarize->add_option("csv", csv_path, "Run CSV")->required();
  summarize->add_option("-o,--output", output, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    cfmimo::MomentOptions options;
    options.workers = workers;
    if (*run) {
      const auto spec = cfmimo::load_spec(spec_path);
      const auto rows = cfmimo::run_experiment(spec, options);
      const std::string param = spec.sweep ? spec.sweep->parameter : "";
      emit(output.empty() ? spec.output_path : output, [&](std::ostream& os) { cfmimo::write_rows(os, rows, param); });
    } else if (*validate) {
      const auto spec = cfmimo::load_spec(spec_path);
      const auto rows = cfmimo::validate_experiment(spec, options);
      const std::string param = spec.sweep ? spec.sweep->parameter : "";
      emit(output, [&](std::ostream& os) { cfmimo::write_validation(os, rows, param); });
      double worst = 0.0;
      for (const auto& r : rows) worst = std::max(worst, r.deviation);
      if (!(worst < spec.tolerance))
        return fail("validation", "maximum per-UE deviation " + std::to_string(worst) + " exceeds tolerance " +
                                      std::to_string(spec.tolerance));
    } else {
      std::ifstream in(csv_path);
      if (!in) throw cfmimo::ConfigError("csv", "cannot open '" + csv_path + "'");
      const auto summary = cfmimo::summarize(in);
      emit(output, [&](std::ostream& os) { cfmimo::write_summary(os, summary); });
    }
  } catch (const cfmimo::ConfigError& e) {
    return fail("config", e.what(), e.field());
  } catch (const cfmimo::NumericalError& e) {
    return fail("numerical", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
