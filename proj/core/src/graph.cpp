#include "ccbf/graph.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ccbf/errors.hpp"

namespace ccbf {

NetworkGraph::NetworkGraph(std::size_t node_count, std::vector<Edge> edges,
                           std::vector<int> state_dims, std::vector<int> control_dims)
    : node_count_(node_count),
      edges_(std::move(edges)),
      state_dims_(std::move(state_dims)),
      control_dims_(std::move(control_dims)),
      incoming_(node_count),
      outgoing_(node_count) {
  if (state_dims_.empty()) state_dims_.assign(node_count_, 1);
  if (control_dims_.empty()) control_dims_.assign(node_count_, 1);
  for (const auto& e : edges_) {
    if (e.from >= node_count_ || e.to >= node_count_ || e.from == e.to) continue;
    incoming_[e.to].push_back(e.from);
    outgoing_[e.from].push_back(e.to);
  }
  for (auto* lists : {&incoming_, &outgoing_}) {
    for (auto& v : *lists) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }
}

NetworkGraph NetworkGraph::build(std::size_t node_count, std::vector<Edge> edges,
                                 std::vector<int> state_dims,
                                 std::vector<int> control_dims) {
  NetworkGraph g(node_count, std::move(edges), std::move(state_dims),
                 std::move(control_dims));
  auto issues = g.validate();
  if (!issues.empty()) {
    std::string msg = "invalid graph:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw Error(msg);
  }
  return g;
}

void NetworkGraph::check_node(NodeId i) const {
  if (i >= node_count_) {
    throw IndexError(fmt::format("node {} out of range for {}-node graph", i, node_count_));
  }
}

int NetworkGraph::state_dim(NodeId i) const {
  check_node(i);
  if (i >= state_dims_.size()) throw DimensionError(fmt::format("no state dimension for node {}", i));
  return state_dims_[i];
}

int NetworkGraph::control_dim(NodeId i) const {
  check_node(i);
  if (i >= control_dims_.size()) throw DimensionError(fmt::format("no control dimension for node {}", i));
  return control_dims_[i];
}

const std::vector<NodeId>& NetworkGraph::in_neighbors(NodeId i) const {
  check_node(i);
  return incoming_[i];
}

const std::vector<NodeId>& NetworkGraph::out_neighbors(NodeId i) const {
  check_node(i);
  return outgoing_[i];
}

bool NetworkGraph::has_edge(NodeId from, NodeId to) const {
  if (to >= node_count_) return false;
  const auto& in = incoming_[to];
  return std::binary_search(in.begin(), in.end(), from);
}

std::vector<std::string> NetworkGraph::validate() const {
  std::vector<std::string> out;
  if (node_count_ == 0) out.emplace_back("node count must be positive");
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& e = edges_[k];
    if (e.from >= node_count_ || e.to >= node_count_) {
      out.push_back(fmt::format("edge {} ({} -> {}): endpoint out of range", k, e.from, e.to));
    } else if (e.from == e.to) {
      out.push_back(fmt::format("edge {} ({} -> {}): self-loop", k, e.from, e.to));
    }
  }
  if (state_dims_.size() != node_count_) {
    out.push_back(fmt::format("state_dims has {} entries, expected {}", state_dims_.size(),
                              node_count_));
  }
  if (control_dims_.size() != node_count_) {
    out.push_back(fmt::format("control_dims has {} entries, expected {}",
                              control_dims_.size(), node_count_));
  }
  for (std::size_t i = 0; i < state_dims_.size(); ++i) {
    if (state_dims_[i] <= 0) out.push_back(fmt::format("node {}: state dimension must be positive", i));
  }
  for (std::size_t i = 0; i < control_dims_.size(); ++i) {
    if (control_dims_[i] <= 0) out.push_back(fmt::format("node {}: control dimension must be positive", i));
  }
  return out;
}

NetworkGraph complete_graph(std::size_t node_count) {
  std::vector<NetworkGraph::Edge> edges;
  for (NodeId from = 0; from < node_count; ++from) {
    for (NodeId to = 0; to < node_count; ++to) {
      if (from != to) edges.push_back({from, to});
    }
  }
  return NetworkGraph(node_count, std::move(edges));
}

}  // namespace ccbf
