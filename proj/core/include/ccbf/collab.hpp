#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ccbf/barrier.hpp"
#include "ccbf/errors.hpp"
#include "ccbf/geometry.hpp"
#include "ccbf/graph.hpp"

namespace ccbf {

enum class MessageKind { request, adjustment };

std::string_view to_string(MessageKind kind);

/// Request: the share delta_ij of a deficit (or surplus) node `from` asks
/// of incoming neighbor `to`. Adjustment: the nonnegative epsilon_ki a
/// node sends back when it cannot meet a request.
struct CollabMessage {
  MessageKind kind;
  NodeId from;
  NodeId to;
  double value;
};

/// Receives every message with the protocol sub-round it was sent in.
using MessageSink = std::function<void(int sub_round, const CollabMessage&)>;

enum class WeightRule { abs_coupling, uniform };

WeightRule parse_weight_rule(std::string_view name);
std::string_view to_string(WeightRule rule);

/// Per-node protocol state.
struct CollabLedger {
  std::map<NodeId, double> out_alloc;  // responsibility assigned to incoming neighbor j
  std::map<NodeId, double> in_req;     // responsibility accepted for outgoing neighbor k
  std::set<NodeId> constrained;        // incoming neighbors that pushed back (this call)
  double capability = 0.0;
  Vec argmax;
  double deficit = 0.0;
  int round = 0;
  ControlRegion region;
};

std::string dump(const std::vector<CollabLedger>& ledgers);

/// Splits `amount` across the non-excluded keys of `weights` in proportion
/// to their weight. Excluded keys receive 0.
/// Throws DegenerateWeightsError when every eligible weight is zero and
/// `amount` is nonzero.
std::map<NodeId, double> partition(double amount, const std::map<NodeId, double>& weights,
                                   const std::set<NodeId>& excluded);

struct CoordinateResult {
  ControlRegion region;
  std::map<NodeId, double> adjustments;
};

/// Processes the requests of outgoing neighbors. `normals` holds a_ki for
/// every outgoing neighbor k, `deltas` the new requests delta_ki (missing
/// entries count as zero). Updates ledger.in_req and ledger.region.
CoordinateResult coordinate(CollabLedger& ledger, const std::map<NodeId, Vec>& normals,
                            const std::map<NodeId, double>& deltas);

/// One node's inputs to the protocol: its psi2 decomposition and its box.
struct NodeProblem {
  Psi2Decomposition decomposition;
  Box box;
};

struct ProtocolOptions {
  int outer_cap = 16;
  int inner_cap = 64;
  WeightRule weights = WeightRule::abs_coupling;
  /// Partition conservation is asserted against this tolerance.
  double conservation_tol = 1e-12;
  bool check_conservation = true;
};

struct ProtocolStats {
  int outer_rounds = 0;
  int inner_rounds = 0;
  double max_conservation_error = 0.0;
};

struct SafetyOutcome {
  std::vector<ControlRegion> regions;
  std::vector<CollabLedger> ledgers;
  ProtocolStats stats;
};

/// No joint control satisfies every node: the listed nodes still have a
/// deficit with every incoming neighbor already pushed to its limit. The
/// outcome holds the best-effort regions.
class TerminallyInfeasibleError : public Error {
 public:
  TerminallyInfeasibleError(std::vector<NodeId> nodes, SafetyOutcome outcome);
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const SafetyOutcome& outcome() const { return outcome_; }

 private:
  std::vector<NodeId> nodes_;
  SafetyOutcome outcome_;
};

/// Synchronous round-based execution of the collaboration protocol over all
/// nodes. Messages are delivered in ascending (from, to) order.
class CollabEngine {
 public:
  CollabEngine(const NetworkGraph& graph, std::vector<NodeProblem> problems,
               ProtocolOptions opts = {}, MessageSink sink = {});

  /// Carries responsibility allocations over from a previous run.
  void seed_allocations(const std::vector<CollabLedger>& previous);

  /// Capability of every node over its current region.
  void update_capabilities();

  /// Request/coordinate/adjust sub-rounds until every node halts. Returns
  /// the number of sub-rounds. Throws ProtocolStallError at the inner cap.
  int collaborate();

  /// Outer loop: capability, collaborate, until no node has a deficit.
  SafetyOutcome run();

  const std::vector<CollabLedger>& ledgers() const { return ledgers_; }
  const ProtocolStats& stats() const { return stats_; }
  double deficit(NodeId i) const;

 private:
  std::map<NodeId, double> shares(NodeId i, double delta) const;
  SafetyOutcome outcome() const;

  const NetworkGraph& graph_;
  std::vector<NodeProblem> problems_;
  ProtocolOptions opts_;
  MessageSink sink_;
  std::vector<CollabLedger> ledgers_;
  std::vector<std::map<NodeId, double>> weights_;
  std::vector<std::map<NodeId, Vec>> normals_;  // a_ki per node i, keyed by k
  ProtocolStats stats_;
  int sub_round_ = 0;
};

/// Runs the protocol to completion and returns each node's region.
/// Throws TerminallyInfeasibleError or ProtocolStallError.
SafetyOutcome collaborative_safety(const NetworkGraph& graph, std::vector<NodeProblem> problems,
                                   const ProtocolOptions& opts = {}, MessageSink sink = {},
                                   const std::vector<CollabLedger>* previous = nullptr);

}  // namespace ccbf
