#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccbf {

using Vec = Eigen::VectorXd;

/// Membership slack used for halfspace and box checks.
inline constexpr double kMembershipTol = 1e-9;

/// Axis-aligned box, the admissible control set of a node.
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi);
  static Box interval(double lo, double hi);

  int dim() const { return static_cast<int>(lower.size()); }
  Vec center() const { return 0.5 * (lower + upper); }
  Vec project(const Vec& u) const;
  bool contains(const Vec& u, double tol = kMembershipTol) const;
};

/// { u : normal . u + offset >= 0 }.
struct Halfspace {
  Vec normal;
  double offset = 0.0;

  double value(const Vec& u) const { return normal.dot(u) + offset; }
  bool contains(const Vec& u, double tol = kMembershipTol) const { return value(u) >= -tol; }
  /// Zero normal: the halfspace is all of R^M (offset >= 0) or empty.
  bool trivial() const;
  Vec project(const Vec& u) const;
};

/// A box intersected with request halfspaces, or a single frozen point of
/// the box when the node had to settle on a compromise control.
class ControlRegion {
 public:
  ControlRegion() = default;
  explicit ControlRegion(Box box, std::vector<Halfspace> requests = {});
  static ControlRegion frozen(Box box, Vec point);

  const Box& box() const { return box_; }
  const std::vector<Halfspace>& requests() const { return requests_; }
  const std::optional<Vec>& frozen_point() const { return frozen_; }
  int dim() const { return box_.dim(); }

  bool contains(const Vec& u, double tol = kMembershipTol) const;

 private:
  Box box_;
  std::vector<Halfspace> requests_;
  std::optional<Vec> frozen_;
};

/// Closed interval; empty when lo > hi.
struct Interval {
  double lo;
  double hi;
  bool empty() const { return lo > hi; }
};

struct GeometryOptions {
  double tolerance = 1e-9;
  int max_sweeps = 100000;
};

struct ClosestPoint {
  Vec point;        // point of the box
  double distance;  // Euclidean distance to the polytope
};

/// Result of the weak non-interference test. When `holds`, `direction` is a
/// unit vector with positive inner product against every normal.
struct NonInterference {
  bool holds = false;
  Vec direction;
  std::string diagnostic;
};

ControlRegion intersect(const Box& box, std::vector<Halfspace> halfspaces);

bool is_empty(const ControlRegion& region, const GeometryOptions& opts = {});

/// Exact feasible set of a one-dimensional region. Near-touching bounds
/// (within kMembershipTol) collapse to a point rather than reporting empty.
Interval feasible_interval(const ControlRegion& region);

/// One-dimensional polytope as an interval (possibly unbounded).
Interval polytope_interval(std::span<const Halfspace> polytope);

/// Euclidean projection onto the intersection of halfspaces (Dykstra).
Vec project_onto_polytope(const Vec& p, std::span<const Halfspace> polytope,
                          const GeometryOptions& opts = {});

/// Euclidean projection onto box-and-halfspaces (Dykstra); frozen regions
/// project to their point.
Vec project_onto_region(const Vec& p, const ControlRegion& region,
                        const GeometryOptions& opts = {});

/// Point of the box closest to the polytope, by (momentum-accelerated)
/// alternating projection between the box and the polytope starting from
/// the box center, stopped once the distance is certified within tolerance.
/// Precondition: the polytope is nonempty. Trivial halfspaces with a
/// nonnegative offset are ignored; an empty trivial halfspace throws
/// EmptyRegionError.
ClosestPoint closest_point(const Box& box, std::span<const Halfspace> polytope,
                           const GeometryOptions& opts = {});

/// Is there a direction a with a . n > 0 for every normal n?
NonInterference weakly_non_interfering(std::span<const Vec> normals);

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
Vec min_norm_point(std::span<const Vec> points);

}  // namespace ccbf
