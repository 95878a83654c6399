#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ccbf/barrier.hpp"
#include "ccbf/collab.hpp"
#include "ccbf/dynamics.hpp"
#include "ccbf/geometry.hpp"

namespace ccbf {

/// A protocol or integration failure, stamped with the simulation time.
class SimulationError : public Error {
 public:
  SimulationError(double time, const std::string& what);
  double time() const { return time_; }

 private:
  double time_;
};

struct SimOptions {
  double dt = 0.01;
  double t_final = 100.0;
  UdotPolicy udot = UdotPolicy::zero;
  ProtocolOptions protocol;
  bool collaboration = true;
  bool continue_on_infeasible = false;
  /// Carry c̄_ij / c̄_ki from one step into the next instead of resetting.
  bool persist_ledger = false;
};

struct Scenario {
  std::shared_ptr<const NetworkModel> model;
  std::vector<Box> boxes;
  std::vector<BarrierSpec> barriers;
  NetworkState x0;
  /// Constant nominal control per node.
  std::vector<Vec> nominal;
  SimOptions sim;

  /// Throws DimensionError when the per-node vectors disagree with the graph.
  void check() const;
};

/// Row k holds the state at times[k], the control applied over
/// [times[k], times[k] + dt], and what the protocol reported for that state.
struct ScenarioResult {
  std::vector<double> times;
  std::vector<NetworkState> states;
  std::vector<NetworkState> controls;
  std::vector<std::vector<double>> capabilities;
  std::vector<int> outer_rounds;
  std::vector<int> inner_rounds;
  std::vector<std::vector<double>> violations;  // min(h_i, 0)
  std::vector<std::vector<bool>> relaxed;       // safety filter fell back to best effort

  bool halted = false;
  std::optional<double> infeasible_since;
  std::vector<NodeId> infeasible_nodes;
  int infeasible_steps = 0;
  double max_conservation_error = 0.0;

  std::size_t rows() const { return times.size(); }
  int relaxed_count() const;
};

struct FilterResult {
  Vec u;
  bool relaxed = false;
};

/// Closest control to `nominal` in region ∩ {psi1 >= 0}; when that set is
/// empty, the region point with the largest psi1.
FilterResult safety_filter(const Vec& nominal, const ControlRegion& region,
                           const BarrierSpec& spec, const LieTable& lie, const Vec& x_i);

using TraceSink = std::function<void(double time, int sub_round, const CollabMessage&)>;

ScenarioResult run_scenario(const Scenario& scenario, const TraceSink& trace = {});

/// Same loop with u = 0 and no protocol.
ScenarioResult run_uncontrolled(const Scenario& scenario);

/// Number of integration steps for the horizon.
long step_count(const SimOptions& sim);

}  // namespace ccbf
