#include "ccbf/dynamics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ccbf/errors.hpp"

namespace ccbf {

namespace {

void check_size(const Vec& v, int expected, NodeId node, const char* what) {
  if (v.size() != expected) {
    throw DimensionError(fmt::format("node {}: {} has length {}, expected {}", node, what,
                                     v.size(), expected));
  }
}

template <typename Map>
bool keys_match(const Map& m, const std::vector<NodeId>& ids) {
  if (m.size() != ids.size()) return false;
  auto it = m.begin();
  for (NodeId id : ids) {
    if (it->first != id) return false;
    ++it;
  }
  return true;
}

}  // namespace

NeighborhoodState NeighborhoodState::neighbor_view(NodeId j) const {
  auto self_it = one_hop.find(j);
  auto hop_it = two_hop.find(j);
  if (self_it == one_hop.end() || hop_it == two_hop.end()) {
    throw ProtocolStateError(fmt::format("node {} has no neighborhood entry for {}", node, j));
  }
  NeighborhoodState view;
  view.node = j;
  view.self = self_it->second;
  view.one_hop = hop_it->second;
  return view;
}

NeighborhoodState snapshot(const NetworkGraph& graph, const NetworkState& x, NodeId i) {
  if (x.size() != graph.node_count()) {
    throw DimensionError(fmt::format("network state has {} nodes, graph has {}", x.size(),
                                     graph.node_count()));
  }
  NeighborhoodState nbr;
  nbr.node = i;
  nbr.self = x[i];
  for (NodeId j : graph.in_neighbors(i)) {
    nbr.one_hop.emplace(j, x[j]);
    auto& hop = nbr.two_hop[j];
    for (NodeId l : graph.in_neighbors(j)) hop.emplace(l, x[l]);
  }
  return nbr;
}

void check_neighborhood(const NetworkGraph& graph, const NeighborhoodState& nbr) {
  const auto& in = graph.in_neighbors(nbr.node);
  if (!keys_match(nbr.one_hop, in)) {
    throw ProtocolStateError(fmt::format("node {}: one-hop keys do not match incoming neighbors", nbr.node));
  }
  if (!nbr.two_hop.empty() || !in.empty()) {
    if (!keys_match(nbr.two_hop, in)) {
      throw ProtocolStateError(fmt::format("node {}: two-hop keys do not match incoming neighbors", nbr.node));
    }
    for (const auto& [j, hop] : nbr.two_hop) {
      if (!keys_match(hop, graph.in_neighbors(j))) {
        throw ProtocolStateError(fmt::format("node {}: two-hop block of {} does not match its incoming neighbors", nbr.node, j));
      }
    }
  }
}

bool LieTable::all_finite() const {
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!std::isfinite(lf_h) || !std::isfinite(lf2_h)) return false;
  if (!finite(lg_h) || !finite(lg2_h) || !finite(lgi_lfi_h) || !finite(lfi_lgi_h)) return false;
  for (const auto& [j, v] : lfj_lfi_h) {
    if (!std::isfinite(v)) return false;
  }
  for (const auto& [j, v] : lgj_lfi_h) {
    if (!finite(v)) return false;
  }
  return true;
}

Vec drift(const NetworkModel& model, const NeighborhoodState& nbr, NodeId i) {
  const auto& g = model.graph();
  if (nbr.node != i) {
    throw ProtocolStateError(fmt::format("neighborhood is for node {}, not {}", nbr.node, i));
  }
  check_size(nbr.self, g.state_dim(i), i, "state");
  for (const auto& [j, xj] : nbr.one_hop) check_size(xj, g.state_dim(j), j, "neighbor state");
  return model.drift(nbr);
}

Mat control_matrix(const NetworkModel& model, NodeId i, const Vec& x_i) {
  check_size(x_i, model.graph().state_dim(i), i, "state");
  return model.control_matrix(i, x_i);
}

LieTable lie_table(const NetworkModel& model, const NeighborhoodState& nbr, NodeId i,
                   const BarrierSpec& barrier) {
  const LieProvider* provider = model.lie_provider();
  if (provider == nullptr) {
    throw UnsupportedModelError("model does not provide closed-form Lie derivatives");
  }
  if (nbr.node != i) {
    throw ProtocolStateError(fmt::format("neighborhood is for node {}, not {}", nbr.node, i));
  }
  check_size(nbr.self, model.graph().state_dim(i), i, "state");
  return provider->lie_table(nbr, barrier);
}

NetworkState vector_field(const NetworkModel& model, const NetworkState& x,
                          const NetworkState& u) {
  const auto& g = model.graph();
  if (u.size() != g.node_count()) {
    throw DimensionError(fmt::format("control has {} nodes, graph has {}", u.size(), g.node_count()));
  }
  NetworkState dx(x.size());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    check_size(u[i], g.control_dim(i), i, "control");
    auto nbr = snapshot(g, x, i);
    dx[i] = drift(model, nbr, i) + model.control_matrix(i, x[i]) * u[i];
  }
  return dx;
}

}  // namespace ccbf
