#pragma once

#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ccbf/barrier_spec.hpp"
#include "ccbf/graph.hpp"

namespace ccbf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Per-node states, indexed by NodeId.
using NetworkState = std::vector<Vec>;

/// A node's view of the network: its own state, its incoming neighbors'
/// states, and each incoming neighbor's incoming-neighbor states.
struct NeighborhoodState {
  NodeId node = 0;
  Vec self;
  std::map<NodeId, Vec> one_hop;
  std::map<NodeId, std::map<NodeId, Vec>> two_hop;

  /// The neighborhood of incoming neighbor j, rebuilt from the two-hop data.
  /// Its own two-hop block is left empty.
  NeighborhoodState neighbor_view(NodeId j) const;
};

/// Snapshot node i's two-hop neighborhood from the full network state.
NeighborhoodState snapshot(const NetworkGraph& graph, const NetworkState& x, NodeId i);

/// Checks one_hop/two_hop keys against the graph; throws ProtocolStateError.
void check_neighborhood(const NetworkGraph& graph, const NeighborhoodState& nbr);

/// Closed-form Lie derivatives of h_i along the node and neighbor vector
/// fields. Maps are keyed by the incoming neighbors of the node.
struct LieTable {
  double lf_h = 0.0;
  Vec lg_h;
  double lf2_h = 0.0;
  Mat lg2_h;
  std::map<NodeId, double> lfj_lfi_h;
  std::map<NodeId, Vec> lgj_lfi_h;
  Vec lgi_lfi_h;
  Vec lfi_lgi_h;

  bool all_finite() const;
};

class LieProvider {
 public:
  virtual ~LieProvider() = default;
  virtual LieTable lie_table(const NeighborhoodState& nbr, const BarrierSpec& barrier) const = 0;
};

/// Control-affine networked dynamics  x_i' = f_i(x_i, x_{N_i^+}) + g_i(x_i) u_i.
class NetworkModel {
 public:
  virtual ~NetworkModel() = default;

  virtual const NetworkGraph& graph() const = 0;

  /// f_i evaluated on the node's neighborhood; length N_i.
  virtual Vec drift(const NeighborhoodState& nbr) const = 0;

  /// g_i(x_i); N_i x M_i.
  virtual Mat control_matrix(NodeId i, const Vec& x_i) const = 0;

  /// Projects a state back into the model's domain after an integration
  /// step and returns the largest correction applied. Default: no-op.
  virtual double clamp(NetworkState& /*x*/) const { return 0.0; }

  /// nullptr when the model has no closed-form Lie derivatives.
  virtual const LieProvider* lie_provider() const { return nullptr; }
};

Vec drift(const NetworkModel& model, const NeighborhoodState& nbr, NodeId i);
Mat control_matrix(const NetworkModel& model, NodeId i, const Vec& x_i);
LieTable lie_table(const NetworkModel& model, const NeighborhoodState& nbr, NodeId i,
                   const BarrierSpec& barrier);

/// Full closed-loop vector field: x_i' = f_i + g_i u_i for every node.
NetworkState vector_field(const NetworkModel& model, const NetworkState& x,
                          const NetworkState& u);

}  // namespace ccbf
