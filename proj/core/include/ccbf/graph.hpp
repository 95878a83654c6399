#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ccbf {

/// Zero-based node index. External files use one-based ids.
using NodeId = std::size_t;

/// Directed coupling network. An edge `from -> to` means the state of
/// `from` enters the drift of `to`. Topology only; coupling weights live in
/// the dynamics model.
class NetworkGraph {
 public:
  struct Edge {
    NodeId from;
    NodeId to;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  /// Dimensions default to 1 when the vectors are empty. Construction never
  /// throws on malformed input; call validate() or use build().
  NetworkGraph(std::size_t node_count, std::vector<Edge> edges,
               std::vector<int> state_dims = {}, std::vector<int> control_dims = {});

  /// Like the constructor but throws ccbf::Error listing every violation.
  static NetworkGraph build(std::size_t node_count, std::vector<Edge> edges,
                            std::vector<int> state_dims = {},
                            std::vector<int> control_dims = {});

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int state_dim(NodeId i) const;
  int control_dim(NodeId i) const;

  /// Incoming neighbors (nodes whose state enters i's drift), ascending.
  const std::vector<NodeId>& in_neighbors(NodeId i) const;
  /// Outgoing neighbors (nodes whose drift contains i's state), ascending.
  const std::vector<NodeId>& out_neighbors(NodeId i) const;

  bool has_edge(NodeId from, NodeId to) const;

  /// Every invariant violation, empty when the graph is well formed.
  std::vector<std::string> validate() const;

 private:
  void check_node(NodeId i) const;

  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::vector<int> state_dims_;
  std::vector<int> control_dims_;
  std::vector<std::vector<NodeId>> incoming_;
  std::vector<std::vector<NodeId>> outgoing_;
};

NetworkGraph complete_graph(std::size_t node_count);

}  // namespace ccbf
