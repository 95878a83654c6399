#pragma once

#include <string>
#include <vector>

#include "ccbf/dynamics.hpp"

namespace ccbf {

/// Networked SIS parameters. beta(i, j) is the rate at which node j's
/// infected share infects node i; beta(i, i) is the on-node rate.
struct SisParams {
  Mat beta;
  Vec gamma;
  Vec u_max;

  /// Every violation against the graph, empty when consistent.
  std::vector<std::string> validate(const NetworkGraph& graph) const;
};

/// x_i' = -(gamma_i + u_i) x_i + (1 - x_i) sum_j beta_ij x_j, with the
/// healing boost u_i in [0, u_max_i]. States are clamped to [0, 1].
class SisModel final : public NetworkModel, public LieProvider {
 public:
  /// Throws ccbf::Error when params are inconsistent with the graph.
  SisModel(NetworkGraph graph, SisParams params);

  const NetworkGraph& graph() const override { return graph_; }
  const SisParams& params() const { return params_; }

  Vec drift(const NeighborhoodState& nbr) const override;
  Mat control_matrix(NodeId i, const Vec& x_i) const override;
  double clamp(NetworkState& x) const override;
  const LieProvider* lie_provider() const override { return this; }

  /// Exact Lie derivatives of h_i = threshold - x_i along the SIS fields.
  LieTable lie_table(const NeighborhoodState& nbr, const BarrierSpec& barrier) const override;

  /// Scalar drift f_i.
  double drift_value(const NeighborhoodState& nbr) const;

 private:
  NetworkGraph graph_;
  SisParams params_;
};

}  // namespace ccbf
