#ifndef VIP_NODES_HPP
#define VIP_NODES_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vip/error.hpp"
#include "vip/geometry.hpp"

namespace vip {

/// Where a node sits relative to non-periodic boundaries.
enum class NodeRole { Interior, Boundary };

/// Uniform-bucket spatial hash over a (possibly periodic) rectangle.
class SpatialHash {
 public:
  SpatialHash() = default;

  SpatialHash(const Domain& domain, std::span<const Point> points, double bucket_width)
      : lo_(domain.lo()), periodic_{domain.periodic(0), domain.periodic(1)} {
    for (int a = 0; a < 2; ++a) {
      const double len = domain.extent(a);
      cells_[a] = std::max(1, static_cast<int>(std::floor(len / std::max(bucket_width, 1e-300))));
      cells_[a] = std::min(cells_[a], 1 << 14);
      cell_size_[a] = len / cells_[a];
    }
    buckets_.assign(static_cast<std::size_t>(cells_[0]) * cells_[1], {});
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = cell_of(domain.wrap(points[i]));
      buckets_[flat(c[0], c[1])].push_back(static_cast<int>(i));
    }
  }

  /// Candidate indices from every bucket overlapping the max-norm box of
  /// half-width `radius` around p. Unsorted, duplicates removed.
  template <class Visit>
  void for_each_candidate(const Domain& domain, const Point& p, double radius, Visit&& visit) const {
    const auto c = cell_of(domain.wrap(p));
    std::array<std::vector<int>, 2> ranges;
    for (int a = 0; a < 2; ++a) {
      const int span = static_cast<int>(std::ceil(radius / cell_size_[a]));
      if (periodic_[a]) {
        if (2 * span + 1 >= cells_[a]) {
          for (int k = 0; k < cells_[a]; ++k) ranges[a].push_back(k);
        } else {
          for (int k = -span; k <= span; ++k) ranges[a].push_back(((c[a] + k) % cells_[a] + cells_[a]) % cells_[a]);
        }
      } else {
        for (int k = std::max(0, c[a] - span); k <= std::min(cells_[a] - 1, c[a] + span); ++k) ranges[a].push_back(k);
      }
    }
    for (int j : ranges[1]) {
      for (int i : ranges[0]) {
        for (int idx : buckets_[flat(i, j)]) visit(idx);
      }
    }
  }

 private:
  std::array<int, 2> cell_of(const Point& p) const {
    std::array<int, 2> c{};
    for (int a = 0; a < 2; ++a) {
      int k = static_cast<int>(std::floor((p[a] - lo_[a]) / cell_size_[a]));
      c[a] = std::clamp(k, 0, cells_[a] - 1);
    }
    return c;
  }
  std::size_t flat(int i, int j) const { return static_cast<std::size_t>(j) * cells_[0] + i; }

  Point lo_ = Point::Zero();
  std::array<bool, 2> periodic_{false, false};
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> cell_size_{1.0, 1.0};
  std::vector<std::vector<int>> buckets_;
};

/// Scattered approximation nodes carrying all velocity and pressure
/// coefficients. Immutable after construction.
class NodeSet {
 public:
  /// Lattice bookkeeping for sets produced by generate_regular (and copies
  /// perturbed from them).
  struct Lattice {
    double spacing = 0.0;
    std::array<int, 2> counts{0, 0};            // lattice sites per axis, before dropping corners
    std::vector<std::array<int, 2>> index;      // per node
    bool exact = true;                          // false once perturbed
  };

  NodeSet(Domain domain, std::vector<Point> positions, double bucket_width,
          std::optional<Lattice> lattice = std::nullopt)
      : domain_(std::move(domain)), positions_(std::move(positions)), lattice_(std::move(lattice)) {
    for (auto& p : positions_) {
      p = domain_.wrap(p);
      if (!domain_.contains(p)) {
        throw Error(ErrorKind::Config, "node outside domain");
      }
    }
    roles_.resize(positions_.size(), NodeRole::Interior);
    normals_.assign(positions_.size(), Point::Zero());
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      for (int a = 0; a < 2; ++a) {
        if (domain_.periodic(a)) continue;
        if (std::abs(positions_[i][a] - domain_.lo()[a]) < 1e-12) {
          roles_[i] = NodeRole::Boundary;
          normals_[i][a] = -1.0;
        } else if (std::abs(positions_[i][a] - domain_.hi()[a]) < 1e-12) {
          roles_[i] = NodeRole::Boundary;
          normals_[i][a] = 1.0;
        }
      }
    }
    rebuild_hash(bucket_width);
    check_distinct();
  }

  std::size_t size() const { return positions_.size(); }
  const Domain& domain() const { return domain_; }
  const Point& operator[](std::size_t i) const { return positions_[i]; }
  std::span<const Point> positions() const { return positions_; }
  NodeRole role(std::size_t i) const { return roles_[i]; }
  const Point& normal(std::size_t i) const { return normals_[i]; }
  const std::optional<Lattice>& lattice() const { return lattice_; }
  double bucket_width() const { return bucket_width_; }

  /// Indices with wrapped max-norm distance strictly below `radius`, ascending.
  std::vector<int> neighbors(const Point& p, double radius) const {
    std::vector<int> out;
    if (radius <= 0.0) return out;
    hash_.for_each_candidate(domain_, p, radius, [&](int idx) {
      if (domain_.distance(p, positions_[idx]) < radius) out.push_back(idx);
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Same set as neighbors(), by exhaustive scan.
  std::vector<int> neighbors_brute_force(const Point& p, double radius) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      if (domain_.distance(p, positions_[i]) < radius) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  NodeSet with_bucket_width(double w) const {
    NodeSet copy = *this;
    copy.rebuild_hash(w);
    return copy;
  }

 private:
  void rebuild_hash(double w) {
    bucket_width_ = w;
    hash_ = SpatialHash(domain_, positions_, w);
  }

  void check_distinct() const {
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      hash_.for_each_candidate(domain_, positions_[i], 1e-12, [&](int j) {
        if (static_cast<std::size_t>(j) > i && domain_.distance(positions_[i], positions_[j]) < 1e-12) {
          throw Error(ErrorKind::DuplicateNode,
                      "nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
        }
      });
    }
  }

  Domain domain_;
  std::vector<Point> positions_;
  std::vector<NodeRole> roles_;
  std::vector<Point> normals_;
  std::optional<Lattice> lattice_;
  double bucket_width_ = 0.0;
  SpatialHash hash_;
};

/// Number of lattice cells of width h along `axis`; throws if h does not tile it.
inline int cells_along(const Domain& domain, int axis, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::NonconformingSpacing, "spacing must be positive");
  const double ratio = domain.extent(axis) / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::NonconformingSpacing,
                "extent " + std::to_string(domain.extent(axis)) + " is not a multiple of h=" + std::to_string(h));
  }
  return static_cast<int>(n);
}

/// Regular lattice node set.
///
/// Periodic axis with n = L/h cells: sites at lo + (k + 1/2) h, k = 0..n-1.
/// Non-periodic axis: sites at lo + k h, k = 0..n (boundary included). Sites
/// lying on two non-periodic boundaries (corners) are dropped.
/// Ordering is x-fastest over the retained sites.
inline NodeSet generate_regular(const Domain& domain, double h, double bucket_width = 0.0) {
  std::array<int, 2> counts{};
  std::array<double, 2> offset{};
  for (int a = 0; a < 2; ++a) {
    const int n = cells_along(domain, a, h);
    counts[a] = domain.periodic(a) ? n : n + 1;
    offset[a] = domain.periodic(a) ? 0.5 : 0.0;
  }
  NodeSet::Lattice lattice;
  lattice.spacing = h;
  lattice.counts = counts;
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(counts[0]) * counts[1]);
  for (int j = 0; j < counts[1]; ++j) {
    for (int i = 0; i < counts[0]; ++i) {
      const bool edge_x = !domain.periodic(0) && (i == 0 || i == counts[0] - 1);
      const bool edge_y = !domain.periodic(1) && (j == 0 || j == counts[1] - 1);
      if (edge_x && edge_y) continue;
      pts.emplace_back(domain.lo()[0] + (i + offset[0]) * h, domain.lo()[1] + (j + offset[1]) * h);
      lattice.index.push_back({i, j});
    }
  }
  if (bucket_width <= 0.0) bucket_width = 2.6 * h;
  return NodeSet(domain, std::move(pts), bucket_width, std::move(lattice));
}

/// Displaces every node by a uniform random vector of max-norm at most
/// amplitude * h. Coordinates normal to a non-periodic boundary are kept for
/// boundary nodes so they stay on their edge. Deterministic for a fixed seed.
inline NodeSet perturb_nodes(const NodeSet& nodes, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 0.45)) {
    throw Error(ErrorKind::Config, "perturbation amplitude must lie in [0, 0.45)");
  }
  if (!nodes.lattice()) throw Error(ErrorKind::Config, "perturbation needs a lattice node set");
  const double h = nodes.lattice()->spacing;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Point> pts(nodes.positions().begin(), nodes.positions().end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Point d(dist(rng), dist(rng));
    d *= amplitude * h;
    for (int a = 0; a < 2; ++a) {
      if (nodes.normal(i)[a] != 0.0) d[a] = 0.0;
    }
    pts[i] += d;
  }
  auto lattice = nodes.lattice();
  lattice->exact = amplitude == 0.0;
  return NodeSet(nodes.domain(), std::move(pts), nodes.bucket_width(), std::move(lattice));
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::Io, "cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Writes `x,y` CSV in plain decimal notation (shortest round-trip digits).
inline void save_nodes_csv(const NodeSet& nodes, std::ostream& os) {
  os << "x,y\n";
  for (const auto& p : nodes.positions()) {
    os << detail::format_fixed(p[0]) << ',' << detail::format_fixed(p[1]) << '\n';
  }
}

inline std::vector<Point> read_points_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, "empty node file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") throw Error(ErrorKind::Io, "node file header must be 'x,y'");
  std::vector<Point> pts;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::Io, "malformed node line: " + line);
    pts.emplace_back(detail::parse_double(std::string_view(line).substr(0, comma)),
                     detail::parse_double(std::string_view(line).substr(comma + 1)));
  }
  return pts;
}

inline NodeSet load_nodes_csv(const Domain& domain, std::istream& is, double bucket_width) {
  return NodeSet(domain, read_points_csv(is), bucket_width);
}

}  // namespace vip

#endif
