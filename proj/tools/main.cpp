#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccbf/cli.hpp"
#include "ccbf/config.hpp"

namespace {

void add_run_flags(CLI::App* cmd, ccbf::RunOptions& o, std::optional<double>& dt,
                   std::optional<double>& t_final, bool with_set) {
  cmd->add_option("--out", o.out, "Output directory (overrides output.dir)");
  cmd->add_flag("--trace", o.trace, "Write every protocol message to messages.csv");
  cmd->add_flag("--no-collab", o.no_collab, "Each node filters over its full box; no requests");
  cmd->add_flag("--continue-on-infeasible", o.continue_on_infeasible,
                "Keep going with best-effort controls after a terminally infeasible step");
  cmd->add_flag("--uncontrolled", o.uncontrolled, "Zero control, no protocol");
  cmd->add_option("--dt", dt, "Step size (overrides sim.dt)");
  cmd->add_option("--t-final", t_final, "Horizon (overrides sim.t_final)");
  if (with_set) cmd->add_option("--set", o.set, "section.key=value override (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative control barrier functions for networked systems"};
  app.set_version_flag("--version", std::string(ccbf::version()));
  app.require_subcommand(1);

  std::string scenarios;
  for (const auto& s : ccbf::bundled_scenarios()) scenarios += (scenarios.empty() ? "" : ", ") + s;

  ccbf::RunOptions run;
  std::optional<double> run_dt, run_t;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario");
  run_cmd->add_option("scenario", run.source,
                      "Scenario file, meta.json of a previous run, or bundled name (" + scenarios + ")")
      ->required();
  add_run_flags(run_cmd, run, run_dt, run_t, true);

  std::string csv, svg;
  std::optional<std::string> plot_config;
  auto* plot_cmd = app.add_subcommand("plot", "Render result.csv as a two-panel SVG");
  plot_cmd->add_option("result", csv, "result.csv from `run`")->required();
  plot_cmd->add_option("output", svg, "SVG file to write")->required();
  plot_cmd->add_option("--config", plot_config, "Scenario for threshold and limit lines");

  std::string validate_source;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario and print its normalized form");
  validate_cmd->add_option("scenario", validate_source, "Scenario file or bundled name")->required();

  ccbf::SweepOptions sweep;
  std::optional<double> sweep_dt, sweep_t;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the cartesian product of parameter overrides");
  sweep_cmd->add_option("scenario", sweep.base.source, "Scenario file or bundled name")->required();
  sweep_cmd->add_option("--set", sweep.axes, "section.key=v1,v2,... (repeatable)")->required();
  sweep_cmd->add_option("--jobs,-j", sweep.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  add_run_flags(sweep_cmd, sweep.base, sweep_dt, sweep_t, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ccbf::kExitUsage;
  }

  if (*run_cmd) {
    run.dt = run_dt;
    run.t_final = run_t;
    return ccbf::cmd_run(run, std::cout, std::cerr);
  }
  if (*plot_cmd) return ccbf::cmd_plot(csv, svg, plot_config, std::cout, std::cerr);
  if (*validate_cmd) return ccbf::cmd_validate(validate_source, std::cout, std::cerr);
  sweep.base.dt = sweep_dt;
  sweep.base.t_final = sweep_t;
  return ccbf::cmd_sweep(sweep, std::cout, std::cerr);
}
