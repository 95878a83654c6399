#include "ccbf/sis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccbf/errors.hpp"

namespace ccbf {

std::vector<std::string> SisParams::validate(const NetworkGraph& graph) const {
  std::vector<std::string> out;
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  if (beta.rows() != n || beta.cols() != n) {
    out.push_back(fmt::format("beta is {}x{}, expected {}x{}", beta.rows(), beta.cols(), n, n));
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double b = beta(i, j);
        if (!(b >= 0.0)) {
          out.push_back(fmt::format("beta[{}][{}] must be nonnegative", i, j));
          continue;
        }
        if (i == j) continue;
        const bool edge = graph.has_edge(static_cast<NodeId>(j), static_cast<NodeId>(i));
        if (edge && b == 0.0) {
          out.push_back(fmt::format("beta[{}][{}] is zero but edge {} -> {} exists", i, j, j, i));
        } else if (!edge && b > 0.0) {
          out.push_back(fmt::format("beta[{}][{}] is positive but edge {} -> {} is missing", i, j, j, i));
        }
      }
    }
  }
  if (gamma.size() != n) {
    out.push_back(fmt::format("gamma has {} entries, expected {}", gamma.size(), n));
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(gamma(i) > 0.0)) out.push_back(fmt::format("gamma[{}] must be positive", i));
    }
  }
  if (u_max.size() != n) {
    out.push_back(fmt::format("u_max has {} entries, expected {}", u_max.size(), n));
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(u_max(i) > 0.0)) out.push_back(fmt::format("u_max[{}] must be positive", i));
    }
  }
  for (NodeId i = 0; i < graph.node_count(); ++i) {
    if (graph.state_dim(i) != 1 || graph.control_dim(i) != 1) {
      out.push_back(fmt::format("node {}: SIS nodes have one state and one control", i));
    }
  }
  return out;
}

SisModel::SisModel(NetworkGraph graph, SisParams params)
    : graph_(std::move(graph)), params_(std::move(params)) {
  auto issues = params_.validate(graph_);
  if (!issues.empty()) {
    std::string msg = "invalid SIS parameters:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw Error(msg);
  }
}

double SisModel::drift_value(const NeighborhoodState& nbr) const {
  const NodeId i = nbr.node;
  const auto ii = static_cast<Eigen::Index>(i);
  const double xi = nbr.self(0);
  double pressure = params_.beta(ii, ii) * xi;
  for (const auto& [j, xj] : nbr.one_hop) {
    pressure += params_.beta(ii, static_cast<Eigen::Index>(j)) * xj(0);
  }
  return -params_.gamma(ii) * xi + (1.0 - xi) * pressure;
}

Vec SisModel::drift(const NeighborhoodState& nbr) const {
  return Vec::Constant(1, drift_value(nbr));
}

Mat SisModel::control_matrix(NodeId /*i*/, const Vec& x_i) const {
  return Mat::Constant(1, 1, -x_i(0));
}

double SisModel::clamp(NetworkState& x) const {
  double worst = 0.0;
  for (auto& xi : x) {
    const double c = std::clamp(xi(0), 0.0, 1.0);
    worst = std::max(worst, std::abs(c - xi(0)));
    xi(0) = c;
  }
  return worst;
}

LieTable SisModel::lie_table(const NeighborhoodState& nbr, const BarrierSpec& /*barrier*/) const {
  const NodeId i = nbr.node;
  const auto ii = static_cast<Eigen::Index>(i);
  const double xi = nbr.self(0);
  const double fi = drift_value(nbr);

  // d f_i / d x_i
  double neighbor_pressure = 0.0;
  for (const auto& [j, xj] : nbr.one_hop) {
    neighbor_pressure += params_.beta(ii, static_cast<Eigen::Index>(j)) * xj(0);
  }
  const double dfi_dxi =
      (1.0 - 2.0 * xi) * params_.beta(ii, ii) - params_.gamma(ii) - neighbor_pressure;

  LieTable t;
  t.lf_h = -fi;
  t.lg_h = Vec::Constant(1, xi);
  t.lf2_h = -dfi_dxi * fi;
  t.lg2_h = Mat::Constant(1, 1, -xi);
  t.lgi_lfi_h = Vec::Constant(1, dfi_dxi * xi);
  t.lfi_lgi_h = Vec::Constant(1, fi);
  for (const auto& [j, xj] : nbr.one_hop) {
    const double dfi_dxj = (1.0 - xi) * params_.beta(ii, static_cast<Eigen::Index>(j));
    const double fj = drift_value(nbr.neighbor_view(j));
    t.lfj_lfi_h.emplace(j, -dfi_dxj * fj);
    t.lgj_lfi_h.emplace(j, Vec::Constant(1, dfi_dxj * xj(0)));
  }
  return t;
}

}  // namespace ccbf
