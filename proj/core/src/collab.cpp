#include "ccbf/collab.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccbf/log.hpp"

namespace ccbf {

namespace {

constexpr double kZeroWeight = 1e-12;
constexpr double kDeficitTol = 1e-12;

bool same_region(const ControlRegion& a, const ControlRegion& b) {
  if (a.frozen_point().has_value() != b.frozen_point().has_value()) return false;
  if (a.frozen_point() && *a.frozen_point() != *b.frozen_point()) return false;
  if (a.requests().size() != b.requests().size()) return false;
  for (std::size_t k = 0; k < a.requests().size(); ++k) {
    if (a.requests()[k].normal != b.requests()[k].normal ||
        a.requests()[k].offset != b.requests()[k].offset) {
      return false;
    }
  }
  return true;
}

bool same_state(const std::vector<CollabLedger>& a, const std::vector<CollabLedger>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].out_alloc != b[i].out_alloc || a[i].in_req != b[i].in_req ||
        a[i].capability != b[i].capability || !same_region(a[i].region, b[i].region)) {
      return false;
    }
  }
  return true;
}

std::string format_vec(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index k = 0; k < v.size(); ++k) s += fmt::format("{}{:.6g}", k ? ", " : "", v(k));
  return s + ")";
}

}  // namespace

std::string_view to_string(MessageKind kind) {
  return kind == MessageKind::request ? "request" : "adjustment";
}

WeightRule parse_weight_rule(std::string_view name) {
  if (name == "abs_coupling") return WeightRule::abs_coupling;
  if (name == "uniform") return WeightRule::uniform;
  throw Error(fmt::format("unknown weight rule '{}'", name));
}

std::string_view to_string(WeightRule rule) {
  return rule == WeightRule::abs_coupling ? "abs_coupling" : "uniform";
}

std::string dump(const std::vector<CollabLedger>& ledgers) {
  std::string out;
  for (std::size_t i = 0; i < ledgers.size(); ++i) {
    const auto& l = ledgers[i];
    out += fmt::format("node {}: round={} capability={:.9g} deficit={:.9g}\n", i + 1, l.round,
                       l.capability, l.deficit);
    for (const auto& [j, v] : l.out_alloc) {
      out += fmt::format("  out_alloc[{}]={:.9g}{}\n", j + 1, v,
                         l.constrained.count(j) ? " (constrained)" : "");
    }
    for (const auto& [k, v] : l.in_req) out += fmt::format("  in_req[{}]={:.9g}\n", k + 1, v);
    if (l.region.frozen_point()) {
      out += fmt::format("  region frozen at {}\n", format_vec(*l.region.frozen_point()));
    } else {
      out += fmt::format("  region box [{}, {}] with {} halfspaces\n",
                         format_vec(l.region.box().lower), format_vec(l.region.box().upper),
                         l.region.requests().size());
    }
  }
  return out;
}

std::map<NodeId, double> partition(double amount, const std::map<NodeId, double>& weights,
                                   const std::set<NodeId>& excluded) {
  double total = 0.0;
  for (const auto& [j, w] : weights) {
    if (!(w >= 0.0)) throw Error(fmt::format("partition: weight of {} is negative", j));
    if (!excluded.count(j)) total += w;
  }
  std::map<NodeId, double> out;
  if (total <= 0.0) {
    if (amount != 0.0) {
      throw DegenerateWeightsError(
          fmt::format("partition: all eligible weights are zero but amount is {}", amount));
    }
    for (const auto& [j, w] : weights) out.emplace(j, 0.0);
    return out;
  }
  for (const auto& [j, w] : weights) {
    out.emplace(j, excluded.count(j) ? 0.0 : amount * w / total);
  }
  return out;
}

CoordinateResult coordinate(CollabLedger& ledger, const std::map<NodeId, Vec>& normals,
                            const std::map<NodeId, double>& deltas) {
  const Box& box = ledger.region.box();
  CoordinateResult result;
  const bool quiet = std::all_of(deltas.begin(), deltas.end(),
                                 [](const auto& kv) { return kv.second == 0.0; });
  if (normals.empty() || (quiet && ledger.region.frozen_point())) {
    for (const auto& [k, a] : normals) result.adjustments[k] = 0.0;
    result.region = ledger.region;
    return result;
  }

  std::vector<Halfspace> requests;
  std::vector<NodeId> order;
  std::map<NodeId, double> delta;
  for (const auto& [k, a] : normals) {
    auto it = deltas.find(k);
    const double d = it == deltas.end() ? 0.0 : it->second;
    delta[k] = d;
    requests.push_back({a, ledger.in_req[k] + d});
    order.push_back(k);
  }

  ControlRegion region = intersect(box, requests);
  for (NodeId k : order) result.adjustments[k] = 0.0;
  if (!is_empty(region)) {
    result.region = std::move(region);
  } else {
    std::vector<Halfspace> polytope;
    std::vector<Vec> live_normals;
    for (const auto& h : requests) {
      if (!h.trivial()) {
        polytope.push_back(h);
        live_normals.push_back(h.normal);
      }
    }
    const auto wni = weakly_non_interfering(live_normals);
    if (!wni.holds) log().warn("coordinate: requests are not weakly non-interfering: {}", wni.diagnostic);
    const ClosestPoint cp = closest_point(box, polytope);
    result.region = ControlRegion::frozen(box, cp.point);
    for (std::size_t n = 0; n < order.size(); ++n) {
      const double v = requests[n].value(cp.point);
      if (v < 0.0) result.adjustments[order[n]] = -v;
    }
  }
  for (NodeId k : order) ledger.in_req[k] += delta[k] + result.adjustments[k];
  ledger.region = result.region;
  return result;
}

TerminallyInfeasibleError::TerminallyInfeasibleError(std::vector<NodeId> nodes,
                                                     SafetyOutcome outcome)
    : Error([&] {
        std::string s = "terminally infeasible state at node(s)";
        for (NodeId i : nodes) s += fmt::format(" {}", i + 1);
        return s;
      }()),
      nodes_(std::move(nodes)),
      outcome_(std::move(outcome)) {}

CollabEngine::CollabEngine(const NetworkGraph& graph, std::vector<NodeProblem> problems,
                           ProtocolOptions opts, MessageSink sink)
    : graph_(graph),
      problems_(std::move(problems)),
      opts_(opts),
      sink_(std::move(sink)),
      ledgers_(graph.node_count()),
      weights_(graph.node_count()),
      normals_(graph.node_count()) {
  const std::size_t n = graph_.node_count();
  if (problems_.size() != n) {
    throw DimensionError(fmt::format("{} node problems for a {}-node graph", problems_.size(), n));
  }
  for (NodeId i = 0; i < n; ++i) {
    const auto& coupling = problems_[i].decomposition.coupling;
    for (NodeId j : graph_.in_neighbors(i)) {
      auto it = coupling.find(j);
      if (it == coupling.end()) {
        throw ProtocolStateError(fmt::format("node {}: no coupling entry for neighbor {}", i, j));
      }
      double w = opts_.weights == WeightRule::uniform ? 1.0 : it->second.lpNorm<1>();
      if (w < kZeroWeight) w = 0.0;
      weights_[i].emplace(j, w);
      normals_[j].emplace(i, it->second);
      ledgers_[i].out_alloc.emplace(j, 0.0);
      ledgers_[j].in_req.emplace(i, 0.0);
    }
    ledgers_[i].region = ControlRegion(problems_[i].box);
  }
}

void CollabEngine::seed_allocations(const std::vector<CollabLedger>& previous) {
  if (previous.size() != ledgers_.size()) return;
  for (std::size_t i = 0; i < ledgers_.size(); ++i) {
    for (auto& [j, v] : ledgers_[i].out_alloc) {
      auto it = previous[i].out_alloc.find(j);
      if (it != previous[i].out_alloc.end()) v = it->second;
    }
    for (auto& [k, v] : ledgers_[i].in_req) {
      auto it = previous[i].in_req.find(k);
      if (it != previous[i].in_req.end()) v = it->second;
    }
  }
}

double CollabEngine::deficit(NodeId i) const {
  double allocated = 0.0;
  for (const auto& [j, v] : ledgers_[i].out_alloc) allocated += v;
  return ledgers_[i].capability - allocated;
}

void CollabEngine::update_capabilities() {
  for (NodeId i = 0; i < ledgers_.size(); ++i) {
    auto cap = max_capability(problems_[i].decomposition.self_term, ledgers_[i].region);
    ledgers_[i].capability = cap.value;
    ledgers_[i].argmax = std::move(cap.argmax);
    ledgers_[i].deficit = deficit(i);
  }
}

std::map<NodeId, double> CollabEngine::shares(NodeId i, double delta) const {
  const auto& ledger = ledgers_[i];
  try {
    return partition(delta, weights_[i], ledger.constrained);
  } catch (const DegenerateWeightsError&) {
    log().info("node {}: all eligible coupling weights vanish; splitting uniformly", i + 1);
    std::map<NodeId, double> uniform;
    for (const auto& [j, w] : weights_[i]) uniform.emplace(j, 1.0);
    return partition(delta, uniform, ledger.constrained);
  }
}

int CollabEngine::collaborate() {
  const std::size_t n = ledgers_.size();
  std::vector<bool> active(n, true);
  for (auto& l : ledgers_) l.constrained.clear();

  for (int sub = 1; sub <= opts_.inner_cap; ++sub) {
    ++sub_round_;
    ++stats_.inner_rounds;

    // Requests.
    std::vector<std::map<NodeId, double>> sent(n);      // delta_ij keyed by j
    std::vector<std::map<NodeId, double>> received(n);  // delta_ki keyed by k
    for (NodeId i = 0; i < n; ++i) {
      auto& ledger = ledgers_[i];
      ledger.deficit = deficit(i);
      const auto& in = graph_.in_neighbors(i);
      if (!active[i] || in.empty() || ledger.constrained.size() == in.size()) continue;
      auto split = shares(i, ledger.deficit);
      double total = 0.0;
      for (NodeId j : in) {
        if (ledger.constrained.count(j)) continue;
        total += split[j];
        sent[i][j] = split[j];
        received[j][i] = split[j];
        if (sink_) sink_(sub_round_, {MessageKind::request, i, j, split[j]});
      }
      const double err = std::abs(total - ledger.deficit);
      stats_.max_conservation_error = std::max(stats_.max_conservation_error, err);
      if (opts_.check_conservation && err > opts_.conservation_tol) {
        throw ProtocolStateError(fmt::format(
            "node {}: request shares sum to {:.17g}, deficit is {:.17g}", i + 1, total, ledger.deficit));
      }
    }

    // Coordinate, then adjustments back to the requesters.
    std::vector<std::map<NodeId, double>> eps_sent(n);
    for (NodeId i = 0; i < n; ++i) {
      eps_sent[i] = coordinate(ledgers_[i], normals_[i], received[i]).adjustments;
    }
    std::vector<std::map<NodeId, double>> eps_received(n);
    for (NodeId i = 0; i < n; ++i) {
      for (const auto& [k, e] : eps_sent[i]) {
        eps_received[k][i] = e;
        if (e > 0.0 && sink_) sink_(sub_round_, {MessageKind::adjustment, i, k, e});
      }
    }

    // Apply and decide who keeps going.
    bool any_active = false;
    for (NodeId i = 0; i < n; ++i) {
      auto& ledger = ledgers_[i];
      bool got_eps = false;
      for (auto& [j, alloc] : ledger.out_alloc) {
        const double d = sent[i].count(j) ? sent[i][j] : 0.0;
        const double e = eps_received[i].count(j) ? eps_received[i][j] : 0.0;
        alloc += d + e;
        if (e > 0.0) {
          ledger.constrained.insert(j);
          got_eps = true;
        }
      }
      const bool sent_eps = std::any_of(eps_sent[i].begin(), eps_sent[i].end(),
                                        [](const auto& kv) { return kv.second > 0.0; });
      const bool saturated = ledger.constrained.size() == graph_.in_neighbors(i).size();
      if (active[i]) {
        active[i] = !(saturated || (!got_eps && !sent_eps));
      } else if (got_eps && !saturated) {
        active[i] = true;
      }
      any_active = any_active || active[i];
    }
    if (!any_active) {
      for (NodeId i = 0; i < n; ++i) ledgers_[i].deficit = deficit(i);
      return sub;
    }
  }
  throw ProtocolStallError(
      fmt::format("collaboration did not settle within {} sub-rounds", opts_.inner_cap),
      dump(ledgers_));
}

SafetyOutcome CollabEngine::outcome() const {
  SafetyOutcome out;
  out.ledgers = ledgers_;
  out.stats = stats_;
  out.regions.reserve(ledgers_.size());
  for (const auto& l : ledgers_) out.regions.push_back(l.region);
  return out;
}

SafetyOutcome CollabEngine::run() {
  const std::size_t n = ledgers_.size();
  for (int outer = 1; outer <= opts_.outer_cap; ++outer) {
    stats_.outer_rounds = outer;
    const auto before = ledgers_;
    for (auto& l : ledgers_) ++l.round;
    update_capabilities();
    collaborate();
    update_capabilities();
    bool done = true;
    for (NodeId i = 0; i < n; ++i) done = done && ledgers_[i].deficit >= -kDeficitTol;
    if (done) return outcome();
    // Nothing moved: every further round would replay this one.
    if (same_state(before, ledgers_)) break;
  }

  std::vector<NodeId> exhausted;
  std::vector<NodeId> stuck;
  for (NodeId i = 0; i < n; ++i) {
    if (ledgers_[i].deficit >= -kDeficitTol) continue;
    if (ledgers_[i].constrained.size() == graph_.in_neighbors(i).size()) {
      exhausted.push_back(i);
    } else {
      stuck.push_back(i);
    }
  }
  if (!exhausted.empty()) throw TerminallyInfeasibleError(std::move(exhausted), outcome());
  throw ProtocolStallError(
      fmt::format("deficits remain after {} outer rounds at nodes without saturated neighbors",
                  stats_.outer_rounds),
      dump(ledgers_));
}

SafetyOutcome collaborative_safety(const NetworkGraph& graph, std::vector<NodeProblem> problems,
                                   const ProtocolOptions& opts, MessageSink sink,
                                   const std::vector<CollabLedger>* previous) {
  CollabEngine engine(graph, std::move(problems), opts, std::move(sink));
  if (previous != nullptr) engine.seed_allocations(*previous);
  return engine.run();
}

}  // namespace ccbf
