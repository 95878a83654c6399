#include "ccbf/integrator.hpp"

#include <fmt/format.h>

#include "ccbf/errors.hpp"
#include "ccbf/log.hpp"

namespace ccbf {

namespace {

NetworkState axpy(const NetworkState& x, double a, const NetworkState& d) {
  NetworkState out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * d[i];
  return out;
}

NetworkState checked_field(const NetworkModel& model, const NetworkState& x,
                           const NetworkState& u) {
  auto dx = vector_field(model, x, u);
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!dx[i].allFinite()) {
      throw NumericsError(i, fmt::format("non-finite derivative at node {}", i));
    }
  }
  return dx;
}

}  // namespace

NetworkState rk4_step(const NetworkModel& model, const NetworkState& x, const NetworkState& u,
                      double dt, double* clamp_correction) {
  if (!(dt > 0.0)) throw Error(fmt::format("rk4_step: dt must be positive, got {}", dt));
  const auto k1 = checked_field(model, x, u);
  const auto k2 = checked_field(model, axpy(x, 0.5 * dt, k1), u);
  const auto k3 = checked_field(model, axpy(x, 0.5 * dt, k2), u);
  const auto k4 = checked_field(model, axpy(x, dt, k3), u);
  NetworkState next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    next[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  const double correction = model.clamp(next);
  if (correction > 1e-9) {
    log().warn("state clamp of {:.3e} after integration step exceeds 1e-9", correction);
  }
  if (clamp_correction != nullptr) *clamp_correction = correction;
  return next;
}

}  // namespace ccbf
