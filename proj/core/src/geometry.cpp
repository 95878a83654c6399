#include "ccbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ccbf/errors.hpp"

namespace ccbf {

namespace {

constexpr double kZeroNormal = 1e-12;
// Inner Dykstra runs tighter than the caller's tolerance so that the outer
// alternating projection sees clean iterates.
constexpr double kInnerChangeTol = 1e-26;  // squared
constexpr double kInnerFeasTol = 1e-12;

void check_dims(const Box& box, std::span<const Halfspace> hs) {
  for (const auto& h : hs) {
    if (h.normal.size() != box.dim()) {
      throw DimensionError(fmt::format("halfspace normal has length {}, box has dimension {}",
                                       h.normal.size(), box.dim()));
    }
  }
}

/// Cyclic Dykstra over an optional box followed by halfspaces.
Vec dykstra(const Vec& p, const Box* box, std::span<const Halfspace> hs,
            const GeometryOptions& opts) {
  const std::size_t offset = box != nullptr ? 1 : 0;
  const std::size_t m = hs.size() + offset;
  if (m == 0) return p;
  if (m == 1) return box != nullptr ? box->project(p) : hs[0].project(p);

  std::vector<Vec> incr(m, Vec::Zero(p.size()));
  Vec x = p;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const Vec z = x + incr[k];
      Vec nx = (k < offset) ? box->project(z) : hs[k - offset].project(z);
      Vec next_incr = z - nx;
      change += (next_incr - incr[k]).squaredNorm();
      incr[k] = std::move(next_incr);
      x = std::move(nx);
    }
    if (change <= kInnerChangeTol) {
      bool feasible = box == nullptr || box->contains(x, kInnerFeasTol);
      for (const auto& h : hs) feasible = feasible && h.contains(x, kInnerFeasTol);
      if (feasible) return x;
    }
  }
  double residual = 0.0;
  for (const auto& h : hs) residual = std::max(residual, -h.value(x));
  throw GeometryConvergenceError("Dykstra projection did not converge", x, residual);
}

std::vector<Halfspace> nontrivial(std::span<const Halfspace> hs, bool& empty) {
  std::vector<Halfspace> out;
  empty = false;
  for (const auto& h : hs) {
    if (h.trivial()) {
      if (h.offset < 0.0) empty = true;
    } else {
      out.push_back(h);
    }
  }
  return out;
}

}  // namespace

Box::Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw DimensionError(fmt::format("box bounds have lengths {} and {}", lower.size(), upper.size()));
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!(lower(k) <= upper(k))) {
      throw EmptyRegionError(fmt::format("box coordinate {} has lower {} > upper {}", k,
                                         lower(k), upper(k)));
    }
  }
}

Box Box::interval(double lo, double hi) {
  return Box(Vec::Constant(1, lo), Vec::Constant(1, hi));
}

Vec Box::project(const Vec& u) const { return u.cwiseMax(lower).cwiseMin(upper); }

bool Box::contains(const Vec& u, double tol) const {
  if (u.size() != lower.size()) return false;
  return ((u - lower).array() >= -tol).all() && ((upper - u).array() >= -tol).all();
}

bool Halfspace::trivial() const { return normal.norm() < kZeroNormal; }

Vec Halfspace::project(const Vec& u) const {
  const double v = value(u);
  if (v >= 0.0) return u;
  const double nn = normal.squaredNorm();
  if (nn < kZeroNormal * kZeroNormal) return u;
  return u - (v / nn) * normal;
}

ControlRegion::ControlRegion(Box box, std::vector<Halfspace> requests)
    : box_(std::move(box)), requests_(std::move(requests)) {
  check_dims(box_, requests_);
}

ControlRegion ControlRegion::frozen(Box box, Vec point) {
  if (!box.contains(point)) {
    throw EmptyRegionError("frozen point lies outside the control box");
  }
  ControlRegion r(std::move(box));
  r.frozen_ = std::move(point);
  return r;
}

bool ControlRegion::contains(const Vec& u, double tol) const {
  if (frozen_) return u.size() == frozen_->size() && (u - *frozen_).norm() <= tol;
  if (!box_.contains(u, tol)) return false;
  return std::all_of(requests_.begin(), requests_.end(),
                     [&](const Halfspace& h) { return h.contains(u, tol); });
}

ControlRegion intersect(const Box& box, std::vector<Halfspace> halfspaces) {
  return ControlRegion(box, std::move(halfspaces));
}

Interval polytope_interval(std::span<const Halfspace> polytope) {
  Interval iv{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const auto& h : polytope) {
    if (h.normal.size() != 1) throw DimensionError("polytope_interval needs one-dimensional halfspaces");
    const double a = h.normal(0);
    if (std::abs(a) < kZeroNormal) {
      if (h.offset < 0.0) return {1.0, 0.0};
      continue;
    }
    const double bound = -h.offset / a;
    if (a > 0.0) {
      iv.lo = std::max(iv.lo, bound);
    } else {
      iv.hi = std::min(iv.hi, bound);
    }
  }
  return iv;
}

Interval feasible_interval(const ControlRegion& region) {
  if (region.dim() != 1) throw DimensionError("feasible_interval needs a one-dimensional region");
  if (region.frozen_point()) {
    const double p = (*region.frozen_point())(0);
    return {p, p};
  }
  const Interval poly = polytope_interval(region.requests());
  Interval iv{std::max(region.box().lower(0), poly.lo), std::min(region.box().upper(0), poly.hi)};
  if (iv.lo > iv.hi && iv.lo <= iv.hi + kMembershipTol) {
    // Touching bounds: settle on the box side.
    const double p = std::clamp(0.5 * (iv.lo + iv.hi), region.box().lower(0), region.box().upper(0));
    iv = {p, p};
  }
  return iv;
}

Vec project_onto_polytope(const Vec& p, std::span<const Halfspace> polytope,
                          const GeometryOptions& opts) {
  bool empty = false;
  auto hs = nontrivial(polytope, empty);
  if (empty) throw EmptyRegionError("polytope contains an empty trivial halfspace");
  return dykstra(p, nullptr, hs, opts);
}

Vec project_onto_region(const Vec& p, const ControlRegion& region, const GeometryOptions& opts) {
  if (region.frozen_point()) return *region.frozen_point();
  bool empty = false;
  auto hs = nontrivial(region.requests(), empty);
  if (empty) throw EmptyRegionError("region contains an empty trivial halfspace");
  return dykstra(p, &region.box(), hs, opts);
}

ClosestPoint closest_point(const Box& box, std::span<const Halfspace> polytope,
                           const GeometryOptions& opts) {
  check_dims(box, polytope);
  bool empty = false;
  auto hs = nontrivial(polytope, empty);
  if (empty) throw EmptyRegionError("request polytope contains an empty trivial halfspace");
  if (hs.empty()) return {box.center(), 0.0};

  if (box.dim() == 1) {
    const Interval poly = polytope_interval(hs);
    if (poly.empty()) throw EmptyRegionError("request polytope is empty");
    const double lo = box.lower(0);
    const double hi = box.upper(0);
    double u = std::clamp(0.5 * (lo + hi), std::max(lo, std::min(poly.lo, hi)),
                          std::min(hi, std::max(poly.hi, lo)));
    const double dist = std::max({0.0, poly.lo - u, u - poly.hi});
    return {Vec::Constant(1, u), dist};
  }

  // Projected gradient on dist(p, P)^2 / 2 over the box with Nesterov momentum
  // and function-value restarts. With q = proj_P(p), w = q - p certifies the
  // lower bound (w.q - max_box w.x) / |w| on the distance.
  auto support = [&](const Vec& w) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) s += w(k) * (w(k) > 0.0 ? box.upper(k) : box.lower(k));
    return s;
  };
  Vec p = box.center();
  Vec q = dykstra(p, nullptr, hs, opts);
  double dist = (p - q).norm();
  Vec y = p;
  double t = 1.0;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (dist <= opts.tolerance) return {p, 0.0};
    const Vec w = q - p;
    const double lower = (w.dot(q) - support(w)) / w.norm();
    if (dist - lower <= opts.tolerance) return {p, dist};

    Vec next = box.project(dykstra(y, nullptr, hs, opts));
    Vec next_q = dykstra(next, nullptr, hs, opts);
    const double next_dist = (next - next_q).norm();
    if (next_dist > dist) {
      y = p;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - p);
    t = t_next;
    p = std::move(next);
    q = std::move(next_q);
    dist = next_dist;
  }
  throw GeometryConvergenceError("alternating projection hit its sweep cap", p, dist);
}

bool is_empty(const ControlRegion& region, const GeometryOptions& opts) {
  if (region.frozen_point()) return false;
  if (region.dim() == 1) return feasible_interval(region).empty();
  bool empty = false;
  nontrivial(region.requests(), empty);
  if (empty) return true;
  return closest_point(region.box(), region.requests(), opts).distance > opts.tolerance;
}

Vec min_norm_point(std::span<const Vec> points) {
  if (points.empty()) throw Error("min_norm_point needs at least one point");
  const Eigen::Index dim = points[0].size();
  double scale = 0.0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].size() != dim) throw DimensionError("min_norm_point: mixed dimensions");
    const double n2 = points[k].squaredNorm();
    scale = std::max(scale, n2);
    if (n2 < points[best].squaredNorm()) best = k;
  }
  const double tol = 1e-12 * std::max(scale, 1e-300);

  std::vector<std::size_t> support{best};
  std::vector<double> weights{1.0};
  Vec x = points[best];

  auto combine = [&](const std::vector<double>& w) {
    Vec out = Vec::Zero(dim);
    for (std::size_t s = 0; s < support.size(); ++s) out += w[s] * points[support[s]];
    return out;
  };

  for (int major = 0; major < 1000; ++major) {
    std::size_t j = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double d = x.dot(points[k]);
      if (d < best_dot) {
        best_dot = d;
        j = k;
      }
    }
    if (x.squaredNorm() - best_dot <= tol) break;
    if (std::find(support.begin(), support.end(), j) != support.end()) break;
    support.push_back(j);
    weights.push_back(0.0);

    for (int minor = 0; minor < 1000; ++minor) {
      const auto k = static_cast<Eigen::Index>(support.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
          kkt(a, b) = points[support[a]].dot(points[support[b]]);
        }
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
      }
      Vec rhs = Vec::Zero(k + 1);
      rhs(k) = 1.0;
      const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      std::vector<double> affine(sol.data(), sol.data() + k);

      if (std::all_of(affine.begin(), affine.end(), [](double v) { return v > 1e-15; })) {
        weights = affine;
        x = combine(weights);
        break;
      }
      double theta = 1.0;
      for (std::size_t s = 0; s < support.size(); ++s) {
        if (affine[s] <= 1e-15) {
          const double denom = weights[s] - affine[s];
          if (denom > 0.0) theta = std::min(theta, weights[s] / denom);
        }
      }
      for (std::size_t s = 0; s < support.size(); ++s) {
        weights[s] += theta * (affine[s] - weights[s]);
      }
      std::vector<std::size_t> keep_support;
      std::vector<double> keep_weights;
      for (std::size_t s = 0; s < support.size(); ++s) {
        if (weights[s] > 1e-15) {
          keep_support.push_back(support[s]);
          keep_weights.push_back(weights[s]);
        }
      }
      if (keep_support.empty()) {
        keep_support.push_back(support.back());
        keep_weights.push_back(1.0);
      }
      double total = 0.0;
      for (double w : keep_weights) total += w;
      for (double& w : keep_weights) w /= total;
      support = std::move(keep_support);
      weights = std::move(keep_weights);
      x = combine(weights);
    }
  }
  return x;
}

NonInterference weakly_non_interfering(std::span<const Vec> normals) {
  NonInterference out;
  if (normals.empty()) {
    out.holds = true;
    out.direction = Vec();
    out.diagnostic = "no normals";
    return out;
  }
  const Eigen::Index dim = normals[0].size();
  std::vector<Vec> unit;
  unit.reserve(normals.size());
  for (std::size_t k = 0; k < normals.size(); ++k) {
    if (normals[k].size() != dim) throw DimensionError("weakly_non_interfering: mixed dimensions");
    const double n = normals[k].norm();
    if (n < kZeroNormal) {
      out.diagnostic = fmt::format("normal {} is zero; no direction has positive inner product with it", k);
      return out;
    }
    unit.push_back(normals[k] / n);
  }
  if (dim == 1) {
    const bool positive = std::all_of(unit.begin(), unit.end(), [](const Vec& v) { return v(0) > 0.0; });
    const bool negative = std::all_of(unit.begin(), unit.end(), [](const Vec& v) { return v(0) < 0.0; });
    if (positive || negative) {
      out.holds = true;
      out.direction = Vec::Constant(1, positive ? 1.0 : -1.0);
    } else {
      out.diagnostic = "normals have mixed signs";
    }
    return out;
  }
  const Vec m = min_norm_point(unit);
  const double n = m.norm();
  if (n <= 1e-9) {
    out.diagnostic = "origin lies in the convex hull of the normalized normals";
    return out;
  }
  out.direction = m / n;
  out.holds = std::all_of(unit.begin(), unit.end(),
                          [&](const Vec& v) { return out.direction.dot(v) > 0.0; });
  if (!out.holds) out.diagnostic = "numerical failure: witness does not separate the normals";
  return out;
}

}  // namespace ccbf
