#pragma once

// Reference computations for tests. Nothing here calls into the library's
// numerics, so agreement with it means something.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

/// Forward-mode dual number: value plus one directional derivative.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }

/// Networked SIS written out from scratch on plain arrays.
struct Sis {
  std::vector<std::vector<double>> beta;  // beta[i][j]: j infects i
  std::vector<double> gamma;

  std::size_t n() const { return gamma.size(); }

  template <typename T>
  T drift(const std::vector<T>& x, std::size_t i) const {
    T infection{};
    for (std::size_t j = 0; j < n(); ++j) infection = infection + beta[i][j] * x[j];
    T one{};
    one.v = 1.0;
    return -gamma[i] * x[i] + (one - x[i]) * infection;
  }

  double drift(const std::vector<double>& x, std::size_t i) const {
    double infection = 0.0;
    for (std::size_t j = 0; j < n(); ++j) infection += beta[i][j] * x[j];
    return -gamma[i] * x[i] + (1.0 - x[i]) * infection;
  }

  std::vector<double> field(const std::vector<double>& x, const std::vector<double>& u) const {
    std::vector<double> dx(n());
    for (std::size_t i = 0; i < n(); ++i) dx[i] = drift(x, i) - x[i] * u[i];
    return dx;
  }

  /// psi2 of node i evaluated directly: h'' + eta h' + kappa (h' + eta h),
  /// with h = xbar - x_i and h' = -(f_i - x_i u_i). h'' is the derivative of
  /// h' along the closed-loop field with control rate `udot_i`.
  double psi2(const std::vector<double>& x, const std::vector<double>& u, std::size_t i,
              double xbar, double eta, double kappa, double udot_i) const {
    const auto dx = field(x, u);
    std::vector<Dual> xs(n());
    for (std::size_t k = 0; k < n(); ++k) xs[k] = {x[k], dx[k]};
    const Dual ui{u[i], udot_i};
    const Dual hdot = -(drift(xs, i) - xs[i] * ui);
    const double h = xbar - x[i];
    return hdot.d + eta * hdot.v + kappa * (hdot.v + eta * h);
  }

  double psi1(const std::vector<double>& x, const std::vector<double>& u, std::size_t i,
              double xbar, double eta) const {
    return -(drift(x, i) - x[i] * u[i]) + eta * (xbar - x[i]);
  }
};

template <typename Field>
std::vector<double> rk4(const Field& f, const std::vector<double>& x, double dt) {
  auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + s * b[k];
    return out;
  };
  const auto k1 = f(x);
  const auto k2 = f(axpy(x, dt / 2, k1));
  const auto k3 = f(axpy(x, dt / 2, k2));
  const auto k4 = f(axpy(x, dt, k3));
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = x[k] + dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
  }
  return out;
}

// ---- plane geometry ---------------------------------------------------------

struct P2 {
  double x;
  double y;
};

/// a . p + b >= 0
struct Half2 {
  double ax;
  double ay;
  double b;
  double value(P2 p) const { return ax * p.x + ay * p.y + b; }
};

inline bool inside(const std::vector<Half2>& hs, P2 p, double tol = 1e-12) {
  return std::all_of(hs.begin(), hs.end(), [&](const Half2& h) {
    return h.value(p) >= -tol * std::hypot(h.ax, h.ay);
  });
}

/// Exact distance from p to the intersection of halfspaces (assumed
/// nonempty). The nearest point is either p itself, a projection onto one
/// boundary line, or a vertex where two boundary lines cross.
inline double point_to_polytope(P2 p, const std::vector<Half2>& hs) {
  if (inside(hs, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : hs) {
    const double nn = h.ax * h.ax + h.ay * h.ay;
    const double t = h.value(p) / nn;
    const P2 q{p.x - t * h.ax, p.y - t * h.ay};
    if (inside(hs, q, 1e-10)) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
  }
  for (std::size_t a = 0; a < hs.size(); ++a) {
    for (std::size_t b = a + 1; b < hs.size(); ++b) {
      const double det = hs[a].ax * hs[b].ay - hs[a].ay * hs[b].ax;
      if (std::abs(det) < 1e-14) continue;
      const P2 q{(-hs[a].b * hs[b].ay + hs[b].b * hs[a].ay) / det,
                 (-hs[a].ax * hs[b].b + hs[b].ax * hs[a].b) / det};
      if (inside(hs, q, 1e-10)) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
    }
  }
  return best;
}

/// Distance between the box [lo, hi] and the polytope by brute force over
/// a g x g grid of box points.
inline double grid_distance(P2 lo, P2 hi, const std::vector<Half2>& hs, int g = 200) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g; ++a) {
    for (int b = 0; b < g; ++b) {
      const P2 p{lo.x + (hi.x - lo.x) * a / (g - 1), lo.y + (hi.y - lo.y) * b / (g - 1)};
      best = std::min(best, point_to_polytope(p, hs));
    }
  }
  return best;
}

/// Sutherland-Hodgman clip of a convex polygon by a halfspace.
inline std::vector<P2> clip(const std::vector<P2>& poly, const Half2& h) {
  std::vector<P2> out;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const P2 a = poly[k];
    const P2 b = poly[(k + 1) % poly.size()];
    const double va = h.value(a);
    const double vb = h.value(b);
    if (va >= 0) out.push_back(a);
    if ((va >= 0) != (vb >= 0)) {
      const double t = va / (va - vb);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  return out;
}

/// Exact box-to-polytope distance: zero when the clipped box is nonempty,
/// otherwise the smaller of box-vertex-to-polytope and
/// polytope-vertex-to-box distances (polytope truncated to a large window).
inline double exact_distance(P2 lo, P2 hi, const std::vector<Half2>& hs) {
  std::vector<P2> box{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};
  auto clipped = box;
  for (const auto& h : hs) clipped = clip(clipped, h);
  if (!clipped.empty()) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : box) best = std::min(best, point_to_polytope(v, hs));
  std::vector<P2> window{{-1e3, -1e3}, {1e3, -1e3}, {1e3, 1e3}, {-1e3, 1e3}};
  for (const auto& h : hs) window = clip(window, h);
  for (const auto& v : window) {
    const double dx = std::max({lo.x - v.x, 0.0, v.x - hi.x});
    const double dy = std::max({lo.y - v.y, 0.0, v.y - hi.y});
    best = std::min(best, std::hypot(dx, dy));
  }
  return best;
}

}  // namespace oracle
