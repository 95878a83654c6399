#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ccbf/barrier.hpp"
#include "ccbf/collab.hpp"
#include "ccbf/errors.hpp"
#include "ccbf/simulate.hpp"

namespace ccbf {

/// Every problem found in a scenario file, each prefixed with its path
/// (`model.beta[0][1]`) or line number.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// A value in a scenario file: number, boolean, string, or array.
struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<ConfigValue>> data;
};

/// section -> key -> value
using ConfigDocument = std::map<std::string, std::map<std::string, ConfigValue>>;

/// Syntax only. Throws ConfigError with line numbers.
ConfigDocument parse_document(std::string_view text);

/// Parses a single value as it would appear after `key =`.
ConfigValue parse_value(std::string_view text);

std::string format_number(double v);

struct ScenarioConfig {
  std::size_t nodes = 0;
  std::vector<NetworkGraph::Edge> edges;  // zero-based

  std::string kind = "sis";
  Mat beta;
  Vec gamma;
  Vec u_max;

  Vec threshold;
  Vec eta;
  Vec kappa;
  UdotPolicy udot = UdotPolicy::zero;

  double dt = 0.01;
  double t_final = 100.0;
  Vec x0;
  Vec nominal;
  int outer_cap = 16;
  int inner_cap = 64;
  bool trace = false;
  bool continue_on_infeasible = false;
  bool collaboration = true;
  bool persist_ledger = false;
  WeightRule weights = WeightRule::abs_coupling;

  std::string out_dir = "out";
  std::vector<std::string> formats{"csv"};

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

/// Schema violations of an already-typed config, each with its path.
std::vector<std::string> validate(const ScenarioConfig& config);

/// Parse, fill defaults, validate. Throws ConfigError.
ScenarioConfig parse_config(std::string_view text);

ConfigDocument to_document(const ScenarioConfig& config);
std::string dump(const ConfigDocument& doc);

/// Canonical text form; parse_config(normalize(c)) == c.
std::string normalize(const ScenarioConfig& config);

/// Sets `section.key` from value text and revalidates. Throws ConfigError.
void apply_override(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Names of the scenarios compiled into the library.
std::vector<std::string> bundled_scenarios();

/// Text of a bundled scenario; empty when there is none by that name.
std::string_view bundled_scenario(std::string_view name);

/// Reads a scenario file, or a bundled scenario when `source` names one and
/// no such file exists. Throws IoError or ConfigError.
ScenarioConfig load_config(const std::string& source);

Scenario build_scenario(const ScenarioConfig& config);

}  // namespace ccbf
