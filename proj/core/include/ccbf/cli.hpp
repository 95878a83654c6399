#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ccbf {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,  // bad arguments or an invalid scenario
  kExitInfeasible = 3,
  kExitIo = 4,
};

std::string_view version();

/// `source` is a scenario file, a bundled scenario name, or a meta.json
/// written by a previous run (which reruns that exact configuration).
struct RunOptions {
  std::string source;
  std::optional<std::string> out;
  bool trace = false;
  bool no_collab = false;
  bool continue_on_infeasible = false;
  bool uncontrolled = false;
  std::optional<double> dt;
  std::optional<double> t_final;
  /// `section.key=value` overrides applied before the flags above.
  std::vector<std::string> set;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Threshold and limit lines come from `config` when given, otherwise from a
/// meta.json next to the CSV when there is one.
int cmd_plot(const std::string& csv_path, const std::string& svg_path,
             const std::optional<std::string>& config, std::ostream& out, std::ostream& err);

/// Prints the normalized scenario on success.
int cmd_validate(const std::string& source, std::ostream& out, std::ostream& err);

struct SweepOptions {
  RunOptions base;
  /// `section.key=v1,v2,...`; the sweep runs the cartesian product.
  std::vector<std::string> axes;
  int jobs = 1;
};

/// One subdirectory per combination plus a sweep.csv index.
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace ccbf
