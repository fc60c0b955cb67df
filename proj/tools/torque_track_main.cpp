#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttrack/analysis.hpp"
#include "ttrack/config.hpp"
#include "ttrack/controller.hpp"
#include "ttrack/csv.hpp"
#include "ttrack/svg.hpp"
#include "ttrack/validate.hpp"

namespace {

using nlohmann::json;

int cmd_tune(const std::vector<double>& ts_values, bool as_json) {
  const ttrack::VectorXd ts =
      Eigen::Map<const ttrack::VectorXd>(ts_values.data(),
                                         static_cast<long>(ts_values.size()));
  const ttrack::GainSchedule g = ttrack::tune_gains(ts);
  const double p = ttrack::settling_constant();
  if (as_json) {
    json rows = json::array();
    for (int i = 0; i < g.n(); ++i) {
      rows.push_back(json{{"ts", g.ts[i]},
                          {"omega0", g.omega0[i]},
                          {"kp", g.kp[i]},
                          {"kv", g.kv[i]}});
    }
    std::cout << json{{"settling_constant", p}, {"rows", rows}}.dump(2)
              << "\n";
    return 0;
  }
  std::printf("settling constant P = %.10f\n", p);
  std::printf("%12s %12s %12s %12s\n", "ts [s]", "omega0", "kp", "kv");
  for (int i = 0; i < g.n(); ++i) {
    std::printf("%12.6g %12.6g %12.6g %12.6g\n", g.ts[i], g.omega0[i], g.kp[i],
                g.kv[i]);
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, std::string out_path,
                 std::string plot_path) {
  const ttrack::ScenarioConfig sc = ttrack::load_scenario(config_path);
  if (out_path.empty() && sc.outputs.trace_csv) out_path = *sc.outputs.trace_csv;
  if (plot_path.empty() && sc.outputs.plot_svg) plot_path = *sc.outputs.plot_svg;
  if (out_path.empty()) {
    throw ttrack::InputError(
        "no output path: pass --out or set outputs.trace_csv");
  }

  const ttrack::SimulationResult res = ttrack::run_scenario(sc);
  ttrack::write_trace_csv(out_path, res.trace);
  if (!plot_path.empty() && res.trace.samples() >= 2) {
    ttrack::write_trace_svg(plot_path, res.trace);
  }

  json summary;
  if (res.trace.samples() >= 2) {
    summary = ttrack::summary_to_json(ttrack::summarize(res.trace, sc.gains));
  }
  summary["trace_csv"] = out_path;
  summary["samples"] = res.trace.samples();
  summary["diverged"] = res.diverged;
  if (res.diverged) {
    summary["failure_time"] = res.failure_time;
  }
  std::cout << summary.dump(2) << "\n";
  return res.diverged ? 2 : 0;
}

ttrack::SweepRow run_variant(const ttrack::SweepConfig& sw, double value) {
  ttrack::SweepRow row;
  row.value = value;
  try {
    const ttrack::ScenarioConfig sc = ttrack::make_variant(sw, value);
    const ttrack::SimulationResult res = ttrack::run_scenario(sc);
    row.status = res.diverged ? "diverged" : "ok";
    if (res.trace.samples() >= 2) {
      row.summary = ttrack::summarize(res.trace, sc.gains);
      for (int j = 0; j < res.trace.joints(); ++j) {
        row.oracle_deviation = std::max(
            row.oracle_deviation,
            ttrack::compare_to_oracle(res.trace, sc.gains, j));
      }
    } else {
      row.summary.joints.resize(sc.model.n());
    }
  } catch (const ttrack::InputError&) {
    row.status = "config_error";
  }
  return row;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const ttrack::SweepConfig sw =
      ttrack::parse_sweep(ttrack::load_json_file(config_path));
  std::filesystem::create_directories(out_dir);

  std::vector<double> values = sw.values;
  std::sort(values.begin(), values.end());

  std::vector<std::future<ttrack::SweepRow>> jobs;
  jobs.reserve(values.size());
  for (double v : values) {
    jobs.push_back(std::async(std::launch::async,
                              [&sw, v] { return run_variant(sw, v); }));
  }
  std::vector<ttrack::SweepRow> rows;
  rows.reserve(values.size());
  for (auto& job : jobs) rows.push_back(job.get());

  const int n = ttrack::parse_scenario(sw.base).model.n();
  const std::string table =
      (std::filesystem::path(out_dir) / "sweep.csv").string();
  ttrack::write_sweep_csv(table, ttrack::sweep_parameter_name(sw.parameter),
                          rows, n);
  std::cout << "wrote " << table << " (" << rows.size() << " variants)\n";
  return 0;
}

int cmd_validate(const std::string& model_path, bool as_json) {
  std::vector<std::pair<std::string, ttrack::MechanismModel>> models;
  if (model_path.empty()) {
    models = ttrack::default_validation_models();
  } else {
    models.emplace_back(model_path, ttrack::parse_model(
                                        ttrack::load_json_file(model_path)));
  }
  bool all_ok = true;
  json out = json::array();
  for (const auto& [name, model] : models) {
    const ttrack::ValidationReport rep =
        ttrack::run_validation_suite(model, name);
    all_ok = all_ok && rep.all_passed();
    if (as_json) {
      json checks = json::array();
      for (const ttrack::CheckResult& c : rep.checks) {
        checks.push_back(json{{"name", c.name},
                              {"passed", c.passed},
                              {"worst", c.worst},
                              {"bound", c.bound}});
      }
      out.push_back(json{{"model", name}, {"checks", std::move(checks)}});
    } else {
      for (const ttrack::CheckResult& c : rep.checks) {
        std::printf("[%s] %-12s %-32s worst %.3e bound %.3e\n",
                    c.passed ? "PASS" : "FAIL", name.c_str(), c.name.c_str(),
                    c.worst, c.bound);
      }
    }
  }
  if (as_json) std::cout << out.dump(2) << "\n";
  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "torque-track: computed-torque trajectory tracking for planar chains"};
  app.require_subcommand(1);

  std::vector<double> ts_values;
  bool tune_json = false;
  CLI::App* tune = app.add_subcommand("tune",
                                      "print gains for given settling times");
  tune->add_option("--ts", ts_values, "desired settling time(s), seconds")
      ->required();
  tune->add_flag("--json", tune_json, "machine-readable output");

  std::string sim_config, sim_out, sim_plot;
  CLI::App* sim = app.add_subcommand("simulate",
                                     "run one scenario, write trace CSV");
  sim->add_option("--config", sim_config, "scenario JSON")->required();
  sim->add_option("--out", sim_out, "trace CSV path");
  sim->add_option("--plot", sim_plot, "optional SVG plot path");

  std::string sweep_config, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep",
                                       "run a one-parameter scenario sweep");
  sweep->add_option("--config", sweep_config, "sweep JSON")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();

  std::string validate_model;
  bool validate_json = false;
  CLI::App* validate =
      app.add_subcommand("validate", "run the dynamics oracle checks");
  validate->add_option("--model", validate_model,
                       "model JSON (defaults to bundled 1/2/3-link chains)");
  validate->add_flag("--json", validate_json, "machine-readable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tune->parsed()) {
      for (double t : ts_values) {
        if (!(t > 0.0)) {
          throw ttrack::InputError("--ts values must be > 0");
        }
      }
      return cmd_tune(ts_values, tune_json);
    }
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_plot);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out);
    if (validate->parsed()) return cmd_validate(validate_model, validate_json);
  } catch (const ttrack::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ttrack::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
