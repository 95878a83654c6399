#pragma once

#include "ccbf/dynamics.hpp"

namespace ccbf {

/// Classical fourth-order Runge-Kutta step with the control held constant
/// over the step. The result is passed through model.clamp(); the size of
/// that correction is written to `clamp_correction` when non-null.
///
/// Throws NumericsError naming the first node whose derivative is not finite.
NetworkState rk4_step(const NetworkModel& model, const NetworkState& x, const NetworkState& u,
                      double dt, double* clamp_correction = nullptr);

}  // namespace ccbf
