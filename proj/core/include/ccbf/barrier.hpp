#pragma once

#include <map>
#include <optional>
#include <string_view>

#include "ccbf/barrier_spec.hpp"
#include "ccbf/dynamics.hpp"
#include "ccbf/geometry.hpp"

namespace ccbf {

/// psi0 = h_i(x_i).
double psi0(const BarrierSpec& spec, const Vec& x_i);

/// psi1 = Lf h + Lg h . u_i + eta h.
double psi1(const BarrierSpec& spec, const LieTable& lie, const Vec& x_i, const Vec& u_i);

/// Policy for the control rate u_i' = d(u_i) that appears in the second
/// derivative of h_i.
enum class UdotPolicy { zero, backward_difference };

UdotPolicy parse_udot_policy(std::string_view name);
std::string_view to_string(UdotPolicy policy);

/// d(u_i) written as slope * u_i + offset, so it can be folded into the
/// self term of psi2.
struct UdotAffine {
  double slope = 0.0;
  Vec offset;

  Vec operator()(const Vec& u) const { return slope * u + offset; }
};

/// Affine form of d for the given policy. Without a previous sample the
/// backward difference falls back to zero (logged).
UdotAffine udot_model(UdotPolicy policy, int control_dim, const std::optional<Vec>& u_prev,
                      double dt);

/// Evaluates d(u_now) directly.
Vec udot(UdotPolicy policy, const Vec& u_now, const std::optional<Vec>& u_prev, double dt);

/// constant + linear . u + u^T quadratic u.
struct QuadraticForm {
  double constant = 0.0;
  Vec linear;
  Mat quadratic;

  double operator()(const Vec& u) const;
  int dim() const { return static_cast<int>(linear.size()); }
};

/// psi2 = sum_j coupling[j] . u_j + self_term(u_i).
struct Psi2Decomposition {
  std::map<NodeId, Vec> coupling;
  QuadraticForm self_term;

  double evaluate(const Vec& u_i, const std::map<NodeId, Vec>& u_neighbors) const;
};

Psi2Decomposition decompose_psi2(const BarrierSpec& spec, const LieTable& lie,
                                 const NeighborhoodState& nbr, const UdotAffine& udot);

struct Capability {
  double value;
  Vec argmax;
};

/// Maximum of the self term over the region. Exact in one dimension;
/// projected coordinate ascent with restarts otherwise.
Capability max_capability(const QuadraticForm& self_term, const ControlRegion& region);

}  // namespace ccbf
