#pragma once

namespace ccbf {

/// Upper-threshold barrier on a node's first state coordinate,
/// h_i(x_i) = threshold - x_i[0], with linear class-K gains.
struct BarrierSpec {
  double threshold = 1.0;
  double eta = 1.0;    // gain on h in psi1
  double kappa = 1.0;  // gain on psi1 in psi2
};

}  // namespace ccbf
