#include "ccbf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccbf/integrator.hpp"
#include "ccbf/log.hpp"

namespace ccbf {

namespace {

constexpr double kFlatGradient = 1e-14;

struct StepPlan {
  std::vector<NeighborhoodState> nbr;
  std::vector<LieTable> lie;
  std::vector<NodeProblem> problems;
};

StepPlan plan_step(const Scenario& s, const NetworkState& x,
                   const std::optional<NetworkState>& u_prev) {
  const auto& graph = s.model->graph();
  const std::size_t n = graph.node_count();
  StepPlan plan;
  plan.nbr.reserve(n);
  plan.lie.reserve(n);
  plan.problems.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    plan.nbr.push_back(snapshot(graph, x, i));
    plan.lie.push_back(lie_table(*s.model, plan.nbr.back(), i, s.barriers[i]));
    std::optional<Vec> prev;
    if (u_prev) prev = (*u_prev)[i];
    const auto d = udot_model(s.sim.udot, s.boxes[i].dim(), prev, s.sim.dt);
    plan.problems.push_back(
        {decompose_psi2(s.barriers[i], plan.lie.back(), plan.nbr.back(), d), s.boxes[i]});
  }
  return plan;
}

}  // namespace

SimulationError::SimulationError(double time, const std::string& what)
    : Error(fmt::format("t = {:.6g}: {}", time, what)), time_(time) {}

void Scenario::check() const {
  if (!model) throw Error("scenario has no model");
  const auto& graph = model->graph();
  const std::size_t n = graph.node_count();
  auto expect = [n](std::size_t got, const char* what) {
    if (got != n) throw DimensionError(fmt::format("{} {} for {} nodes", got, what, n));
  };
  expect(boxes.size(), "control boxes");
  expect(barriers.size(), "barrier specs");
  expect(x0.size(), "initial states");
  expect(nominal.size(), "nominal controls");
  for (NodeId i = 0; i < n; ++i) {
    if (boxes[i].dim() != graph.control_dim(i) || nominal[i].size() != graph.control_dim(i)) {
      throw DimensionError(fmt::format("node {}: control dimension mismatch", i + 1));
    }
    if (x0[i].size() != graph.state_dim(i)) {
      throw DimensionError(fmt::format("node {}: state dimension mismatch", i + 1));
    }
  }
  if (!(sim.dt > 0.0)) throw Error("dt must be positive");
  if (!(sim.t_final > sim.dt)) throw Error("t_final must exceed dt");
}

int ScenarioResult::relaxed_count() const {
  int count = 0;
  for (const auto& row : relaxed) count += static_cast<int>(std::count(row.begin(), row.end(), true));
  return count;
}

long step_count(const SimOptions& sim) { return std::lround(sim.t_final / sim.dt); }

FilterResult safety_filter(const Vec& nominal, const ControlRegion& region,
                           const BarrierSpec& spec, const LieTable& lie, const Vec& x_i) {
  const int m = region.dim();
  if (nominal.size() != m || lie.lg_h.size() != m) {
    throw DimensionError("safety_filter: nominal, region and Lie table disagree on dimension");
  }
  const Halfspace cbf{lie.lg_h, lie.lf_h + spec.eta * psi0(spec, x_i)};

  if (region.frozen_point()) {
    const Vec& p = *region.frozen_point();
    return {p, !cbf.contains(p)};
  }

  if (m == 1) {
    const Interval iv = feasible_interval(region);
    if (iv.empty()) throw EmptyRegionError("safety_filter: region is empty");
    const double a = cbf.normal(0);
    double lo = iv.lo;
    double hi = iv.hi;
    bool feasible = true;
    if (std::abs(a) < kFlatGradient) {
      feasible = cbf.offset >= 0.0;
    } else if (a > 0.0) {
      lo = std::max(lo, -cbf.offset / a);
    } else {
      hi = std::min(hi, -cbf.offset / a);
    }
    if (feasible && lo <= hi) return {Vec::Constant(1, std::clamp(nominal(0), lo, hi)), false};
    if (std::abs(a) < kFlatGradient) {
      return {Vec::Constant(1, std::clamp(nominal(0), iv.lo, iv.hi)), true};
    }
    return {Vec::Constant(1, a > 0.0 ? iv.hi : iv.lo), true};
  }

  auto hs = region.requests();
  hs.push_back(cbf);
  const ControlRegion tightened(region.box(), std::move(hs));
  if (!is_empty(tightened)) return {project_onto_region(nominal, tightened), false};
  QuadraticForm objective{cbf.offset, cbf.normal, Mat::Zero(m, m)};
  return {max_capability(objective, region).argmax, true};
}

ScenarioResult run_scenario(const Scenario& s, const TraceSink& trace) {
  s.check();
  const auto& graph = s.model->graph();
  const std::size_t n = graph.node_count();
  const long steps = step_count(s.sim);

  ScenarioResult r;
  NetworkState x = s.x0;
  std::optional<NetworkState> u_prev;
  std::vector<CollabLedger> carried;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * s.sim.dt;
    std::vector<ControlRegion> regions;
    std::vector<double> caps(n);
    int outer = 0;
    int inner = 0;
    StepPlan plan;
    try {
      plan = plan_step(s, x, u_prev);
      if (s.sim.collaboration) {
        MessageSink sink;
        if (trace) sink = [&](int sub, const CollabMessage& m) { trace(t, sub, m); };
        SafetyOutcome outcome;
        try {
          outcome = collaborative_safety(graph, plan.problems, s.sim.protocol, sink,
                                         s.sim.persist_ledger ? &carried : nullptr);
        } catch (const TerminallyInfeasibleError& e) {
          log().warn("t = {:.6g}: {}", t, e.what());
          if (!r.infeasible_since) r.infeasible_since = t;
          for (NodeId i : e.nodes()) {
            if (std::find(r.infeasible_nodes.begin(), r.infeasible_nodes.end(), i) ==
                r.infeasible_nodes.end()) {
              r.infeasible_nodes.push_back(i);
            }
          }
          ++r.infeasible_steps;
          if (!s.sim.continue_on_infeasible) r.halted = true;
          outcome = e.outcome();
        }
        regions = std::move(outcome.regions);
        for (NodeId i = 0; i < n; ++i) caps[i] = outcome.ledgers[i].capability;
        outer = outcome.stats.outer_rounds;
        inner = outcome.stats.inner_rounds;
        r.max_conservation_error =
            std::max(r.max_conservation_error, outcome.stats.max_conservation_error);
        if (s.sim.persist_ledger) carried = std::move(outcome.ledgers);
      } else {
        for (NodeId i = 0; i < n; ++i) {
          regions.emplace_back(s.boxes[i]);
          caps[i] = max_capability(plan.problems[i].decomposition.self_term, regions.back()).value;
        }
      }
    } catch (const ProtocolStallError& e) {
      log().error("t = {:.6g}: protocol stalled; ledgers:\n{}", t, e.ledger_dump());
      throw SimulationError(t, e.what());
    } catch (const Error& e) {
      throw SimulationError(t, e.what());
    }

    NetworkState u(n);
    std::vector<bool> relaxed(n, false);
    std::vector<double> viol(n);
    try {
      for (NodeId i = 0; i < n; ++i) {
        auto f = safety_filter(s.nominal[i], regions[i], s.barriers[i], plan.lie[i], x[i]);
        u[i] = std::move(f.u);
        relaxed[i] = f.relaxed;
        viol[i] = std::min(psi0(s.barriers[i], x[i]), 0.0);
      }
    } catch (const Error& e) {
      throw SimulationError(t, e.what());
    }

    r.times.push_back(t);
    r.states.push_back(x);
    r.controls.push_back(u);
    r.capabilities.push_back(std::move(caps));
    r.outer_rounds.push_back(outer);
    r.inner_rounds.push_back(inner);
    r.violations.push_back(std::move(viol));
    r.relaxed.push_back(std::move(relaxed));
    if (r.halted || k == steps) break;

    try {
      x = rk4_step(*s.model, x, u, s.sim.dt);
    } catch (const Error& e) {
      throw SimulationError(t, e.what());
    }
    u_prev = std::move(u);
  }
  return r;
}

ScenarioResult run_uncontrolled(const Scenario& s) {
  s.check();
  const auto& graph = s.model->graph();
  const std::size_t n = graph.node_count();
  const long steps = step_count(s.sim);

  ScenarioResult r;
  NetworkState x = s.x0;
  NetworkState u(n);
  for (NodeId i = 0; i < n; ++i) u[i] = Vec::Zero(graph.control_dim(i));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * s.sim.dt;
    std::vector<double> viol(n);
    for (NodeId i = 0; i < n; ++i) viol[i] = std::min(psi0(s.barriers[i], x[i]), 0.0);
    r.times.push_back(t);
    r.states.push_back(x);
    r.controls.push_back(u);
    r.capabilities.emplace_back(n, nan);
    r.outer_rounds.push_back(0);
    r.inner_rounds.push_back(0);
    r.violations.push_back(std::move(viol));
    r.relaxed.emplace_back(n, false);
    if (k == steps) break;
    try {
      x = rk4_step(*s.model, x, u, s.sim.dt);
    } catch (const Error& e) {
      throw SimulationError(t, e.what());
    }
  }
  return r;
}

}  // namespace ccbf
