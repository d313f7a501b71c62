#ifndef VIP_GEOMETRY_HPP
#define VIP_GEOMETRY_HPP

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>

#include "vip/error.hpp"

namespace vip {

using Point = Eigen::Vector2d;

/// Axis-aligned rectangle [lo0,hi0] x [lo1,hi1] with per-axis periodicity.
///
/// On a periodic axis every coordinate is understood modulo the extent, and
/// displacements are taken as the minimal image.
class Domain {
 public:
  Domain(Point lo, Point hi, std::array<bool, 2> periodic)
      : lo_(std::move(lo)), hi_(std::move(hi)), periodic_(periodic) {
    for (int a = 0; a < 2; ++a) {
      if (!(hi_[a] > lo_[a])) {
        throw Error(ErrorKind::Config, "domain bounds must satisfy hi > lo on axis " + std::to_string(a));
      }
    }
  }

  static Domain unit_square(bool periodic) {
    return Domain(Point(0.0, 0.0), Point(1.0, 1.0), {periodic, periodic});
  }

  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  double extent(int axis) const { return hi_[axis] - lo_[axis]; }
  bool periodic(int axis) const { return periodic_[axis]; }
  bool fully_periodic() const { return periodic_[0] && periodic_[1]; }
  bool any_periodic() const { return periodic_[0] || periodic_[1]; }

  /// Maps periodic coordinates into [lo, hi).
  Point wrap(const Point& p) const {
    Point q = p;
    for (int a = 0; a < 2; ++a) {
      if (!periodic_[a]) continue;
      const double len = extent(a);
      double t = std::fmod(q[a] - lo_[a], len);
      if (t < 0.0) t += len;
      if (t >= len) t -= len;
      q[a] = lo_[a] + t;
    }
    return q;
  }

  /// Minimal-image displacement a - b.
  Point displacement(const Point& a, const Point& b) const {
    Point d = a - b;
    for (int ax = 0; ax < 2; ++ax) {
      if (!periodic_[ax]) continue;
      const double len = extent(ax);
      d[ax] -= len * std::round(d[ax] / len);
    }
    return d;
  }

  /// Wrapped max-norm distance. The window support is a max-norm ball, so
  /// all neighbor logic uses this metric.
  double distance(const Point& a, const Point& b) const {
    return displacement(a, b).cwiseAbs().maxCoeff();
  }

  /// True if p lies in the closed rectangle (periodic axes always pass).
  bool contains(const Point& p, double tol = 1e-12) const {
    for (int a = 0; a < 2; ++a) {
      if (periodic_[a]) continue;
      if (p[a] < lo_[a] - tol || p[a] > hi_[a] + tol) return false;
    }
    return true;
  }

 private:
  Point lo_;
  Point hi_;
  std::array<bool, 2> periodic_;
};

}  // namespace vip

#endif
