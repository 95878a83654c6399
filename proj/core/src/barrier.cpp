#include "ccbf/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccbf/errors.hpp"
#include "ccbf/log.hpp"

namespace ccbf {

namespace {

// Maximizer of q t^2 + l t over [lo, hi]; candidates are checked in a fixed
// order so ties resolve deterministically.
double argmax_1d(double q, double l, double lo, double hi) {
  auto f = [&](double t) { return q * t * t + l * t; };
  double best = lo;
  double best_val = f(lo);
  if (q < 0.0) {
    const double t = std::clamp(-l / (2.0 * q), lo, hi);
    if (f(t) > best_val) {
      best = t;
      best_val = f(t);
    }
  }
  if (f(hi) > best_val) best = hi;
  return best;
}

constexpr int kAscentIterations = 1000;
constexpr double kAscentTol = 1e-10;

Vec coordinate_ascent(const QuadraticForm& form, const Mat& sym, const ControlRegion& region,
                      Vec u) {
  const int m = form.dim();
  double value = form(u);
  for (int pass = 0; pass < kAscentIterations; ++pass) {
    const double before = value;
    for (int k = 0; k < m; ++k) {
      double lo = region.box().lower(k);
      double hi = region.box().upper(k);
      for (const auto& h : region.requests()) {
        const double a = h.normal(k);
        if (std::abs(a) < 1e-14) continue;
        const double rest = h.value(u) - a * u(k);
        const double bound = -rest / a;
        if (a > 0.0) {
          lo = std::max(lo, bound);
        } else {
          hi = std::min(hi, bound);
        }
      }
      if (lo > hi) continue;  // numerically pinned; leave the coordinate alone
      double cross = form.linear(k);
      for (int l = 0; l < m; ++l) {
        if (l != k) cross += 2.0 * sym(k, l) * u(l);
      }
      const double t = argmax_1d(sym(k, k), cross, lo, hi);
      Vec trial = u;
      trial(k) = t;
      const double v = form(trial);
      if (v >= value) {
        u = std::move(trial);
        value = v;
      }
    }
    if (value - before <= kAscentTol) break;
  }
  return u;
}

}  // namespace

double psi0(const BarrierSpec& spec, const Vec& x_i) { return spec.threshold - x_i(0); }

double psi1(const BarrierSpec& spec, const LieTable& lie, const Vec& x_i, const Vec& u_i) {
  if (u_i.size() != lie.lg_h.size()) {
    throw DimensionError(fmt::format("psi1: control has length {}, expected {}", u_i.size(),
                                     lie.lg_h.size()));
  }
  return lie.lf_h + lie.lg_h.dot(u_i) + spec.eta * psi0(spec, x_i);
}

UdotPolicy parse_udot_policy(std::string_view name) {
  if (name == "zero") return UdotPolicy::zero;
  if (name == "backward_difference") return UdotPolicy::backward_difference;
  throw Error(fmt::format("unknown udot policy '{}'", name));
}

std::string_view to_string(UdotPolicy policy) {
  return policy == UdotPolicy::zero ? "zero" : "backward_difference";
}

UdotAffine udot_model(UdotPolicy policy, int control_dim, const std::optional<Vec>& u_prev,
                      double dt) {
  UdotAffine out{0.0, Vec::Zero(control_dim)};
  if (policy == UdotPolicy::zero) return out;
  if (!u_prev) {
    log().debug("backward-difference udot has no previous sample; using zero");
    return out;
  }
  if (!(dt > 0.0)) throw Error("udot_model: dt must be positive");
  if (u_prev->size() != control_dim) throw DimensionError("udot_model: previous control has wrong length");
  out.slope = 1.0 / dt;
  out.offset = -(*u_prev) / dt;
  return out;
}

Vec udot(UdotPolicy policy, const Vec& u_now, const std::optional<Vec>& u_prev, double dt) {
  return udot_model(policy, static_cast<int>(u_now.size()), u_prev, dt)(u_now);
}

double QuadraticForm::operator()(const Vec& u) const {
  return constant + linear.dot(u) + u.dot(quadratic * u);
}

double Psi2Decomposition::evaluate(const Vec& u_i, const std::map<NodeId, Vec>& u_neighbors) const {
  double total = self_term(u_i);
  for (const auto& [j, a] : coupling) {
    auto it = u_neighbors.find(j);
    if (it == u_neighbors.end()) {
      throw ProtocolStateError(fmt::format("no control given for neighbor {}", j));
    }
    total += a.dot(it->second);
  }
  return total;
}

Psi2Decomposition decompose_psi2(const BarrierSpec& spec, const LieTable& lie,
                                 const NeighborhoodState& nbr, const UdotAffine& udot) {
  const auto m = lie.lg_h.size();
  if (udot.offset.size() != m) throw DimensionError("decompose_psi2: udot has wrong length");

  Psi2Decomposition d;
  double neighbor_drift = 0.0;
  for (const auto& [j, xj] : nbr.one_hop) {
    auto a = lie.lgj_lfi_h.find(j);
    auto f = lie.lfj_lfi_h.find(j);
    if (a == lie.lgj_lfi_h.end() || f == lie.lfj_lfi_h.end()) {
      throw ProtocolStateError(fmt::format("node {}: Lie table has no entry for neighbor {}", nbr.node, j));
    }
    d.coupling.emplace(j, a->second);
    neighbor_drift += f->second;
  }

  const double h = psi0(spec, nbr.self);
  auto& c = d.self_term;
  // h'' (u-free part) + eta h' + kappa (h' + eta h), with h' = Lf h + Lg h . u.
  c.constant = neighbor_drift + lie.lf2_h + lie.lg_h.dot(udot.offset) +
               spec.eta * lie.lf_h + spec.kappa * (lie.lf_h + spec.eta * h);
  c.linear = lie.lfi_lgi_h + lie.lgi_lfi_h + (udot.slope + spec.eta + spec.kappa) * lie.lg_h;
  c.quadratic = lie.lg2_h;
  return d;
}

Capability max_capability(const QuadraticForm& self_term, const ControlRegion& region) {
  const int m = self_term.dim();
  if (region.dim() != m) {
    throw DimensionError(fmt::format("max_capability: form has dimension {}, region {}", m, region.dim()));
  }
  if (region.frozen_point()) {
    return {self_term(*region.frozen_point()), *region.frozen_point()};
  }
  if (m == 1) {
    const Interval iv = feasible_interval(region);
    if (iv.empty()) throw EmptyRegionError("max_capability: region is empty");
    const double t = argmax_1d(self_term.quadratic(0, 0), self_term.linear(0), iv.lo, iv.hi);
    Vec u = Vec::Constant(1, t);
    return {self_term(u), u};
  }

  if (is_empty(region)) throw EmptyRegionError("max_capability: region is empty");
  const Mat sym = 0.5 * (self_term.quadratic + self_term.quadratic.transpose());

  std::vector<Vec> starts{region.box().center()};
  if (m <= 12) {
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      Vec v(m);
      for (int k = 0; k < m; ++k) {
        v(k) = (mask >> k) & 1u ? region.box().upper(k) : region.box().lower(k);
      }
      starts.push_back(std::move(v));
    }
  }
  Capability best{-std::numeric_limits<double>::infinity(), Vec()};
  for (const auto& s : starts) {
    Vec u = coordinate_ascent(self_term, sym, region, project_onto_region(s, region));
    const double v = self_term(u);
    if (v > best.value) best = {v, std::move(u)};
  }
  return best;
}

}  // namespace ccbf
