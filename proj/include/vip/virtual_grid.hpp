#ifndef VIP_VIRTUAL_GRID_HPP
#define VIP_VIRTUAL_GRID_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SPQRSupport>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vip/kernel.hpp"
#include "vip/nodes.hpp"

namespace vip {

/// Regular lattice of virtual interpolation points y_J = origin + (k h, j h).
///
/// Periodic axes carry L/h points starting at lo + h/2; non-periodic axes carry
/// the L/h - 1 interior lattice points starting at lo + h, so that on the
/// default lattice node set T coincides with the interior nodes.
class VirtualGrid {
 public:
  VirtualGrid(Domain domain, double h) : domain_(std::move(domain)), h_(h) {
    for (int a = 0; a < 2; ++a) {
      const int n = cells_along(domain_, a, h);
      counts_[a] = domain_.periodic(a) ? n : n - 1;
      origin_[a] = domain_.lo()[a] + (domain_.periodic(a) ? 0.5 * h : h);
      if (counts_[a] < 1) throw Error(ErrorKind::NonconformingSpacing, "no interior lattice points");
    }
  }

  const Domain& domain() const { return domain_; }
  double spacing() const { return h_; }
  const Point& origin() const { return origin_; }
  const std::array<int, 2>& counts() const { return counts_; }
  std::size_t size() const { return static_cast<std::size_t>(counts_[0]) * counts_[1]; }

  Point point(std::size_t J) const {
    const int k = static_cast<int>(J % counts_[0]);
    const int j = static_cast<int>(J / counts_[0]);
    return Point(origin_[0] + k * h_, origin_[1] + j * h_);
  }

  std::array<int, 2> lattice_index(std::size_t J) const {
    return {static_cast<int>(J % counts_[0]), static_cast<int>(J / counts_[0])};
  }

  std::vector<Point> points() const {
    std::vector<Point> out(size());
    for (std::size_t J = 0; J < out.size(); ++J) out[J] = point(J);
    return out;
  }

 private:
  Domain domain_;
  double h_;
  Point origin_ = Point::Zero();
  std::array<int, 2> counts_{0, 0};
};

/// Half-spacing offsets of every virtual point, in the order
/// (x+, x-, y+, y-), wrapped on periodic axes.
struct StaggeredStencil {
  enum Slot { kXPlus = 0, kXMinus = 1, kYPlus = 2, kYMinus = 3 };

  double h = 0.0;
  std::vector<std::array<Point, 4>> offsets;

  std::size_t size() const { return offsets.size(); }
  const Point& operator()(std::size_t J, int slot) const { return offsets[J][slot]; }
};

inline StaggeredStencil staggered_points(const VirtualGrid& grid) {
  const double h = grid.spacing();
  const Domain& d = grid.domain();
  StaggeredStencil s;
  s.h = h;
  s.offsets.resize(grid.size());
  for (std::size_t J = 0; J < grid.size(); ++J) {
    const Point y = grid.point(J);
    s.offsets[J] = {d.wrap(y + Point(0.5 * h, 0.0)), d.wrap(y - Point(0.5 * h, 0.0)),
                    d.wrap(y + Point(0.0, 0.5 * h)), d.wrap(y - Point(0.0, 0.5 * h))};
  }
  return s;
}

/// For each virtual point, the node sitting exactly on it (within tol), or -1.
inline std::vector<int> colocated_nodes(const NodeSet& nodes, const VirtualGrid& grid, double tol = 1e-9) {
  std::vector<int> out(grid.size(), -1);
  for (std::size_t J = 0; J < grid.size(); ++J) {
    const auto hit = nodes.neighbors(grid.point(J), tol);
    if (hit.size() == 1) out[J] = hit.front();
  }
  return out;
}

struct RealizationReport {
  Eigen::Index rank = 0;
  bool full_row_rank = false;
  double min_singular_value = std::numeric_limits<double>::quiet_NaN();
  std::string method;
};

namespace detail {
inline constexpr Eigen::Index kDenseRealizationCap = 2'500'000;
}

/// Row rank of the interpolation matrix [Psi_I(y_J)].
///
/// Small problems use a dense SVD (rank threshold 1e-10 * sigma_max). Larger
/// ones use a rank-revealing sparse QR (SuiteSparseQR) of the transpose, in which
/// case min_singular_value is left as NaN.
template <class Window>
RealizationReport realization_check(const ShapeFunctions<Window>& shape, const std::vector<Point>& eval_points,
                                    Eigen::Index dense_cap = detail::kDenseRealizationCap) {
  const auto N = static_cast<Eigen::Index>(shape.nodes().size());
  const auto M = static_cast<Eigen::Index>(eval_points.size());
  if (N < M) {
    throw Error(ErrorKind::SizeMismatch, std::to_string(N) + " nodes cannot realize " + std::to_string(M) +
                                             " evaluation points");
  }
  RealizationReport rep;
  if (M == 0) {
    rep.full_row_rank = true;
    rep.method = "empty";
    return rep;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index J = 0; J < M; ++J) {
    const ShapeRow row = shape.evaluate(eval_points[J], kValue);
    for (std::size_t k = 0; k < row.nodes.size(); ++k) trip.emplace_back(J, row.nodes[k], row.values(k, kColValue));
  }
  if (M * N <= dense_cap) {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(M, N);
    for (const auto& t : trip) dense(t.row(), t.col()) += t.value();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * sv(0);
    rep.rank = (sv.array() > cut).count();
    rep.min_singular_value = sv(M - 1);
    rep.method = "dense-svd";
  } else {
    Eigen::SparseMatrix<double> At(N, M);
    for (auto& t : trip) t = Eigen::Triplet<double>(t.col(), t.row(), t.value());
    At.setFromTriplets(trip.begin(), trip.end());
    At.makeCompressed();
    Eigen::SPQR<Eigen::SparseMatrix<double>> qr;
    qr.setPivotThreshold(1e-10);
    qr.compute(At);
    if (qr.info() != Eigen::Success) throw Error(ErrorKind::RealizationFailure, "sparse QR failed");
    rep.rank = qr.rank();
    rep.method = "sparse-qr";
  }
  rep.full_row_rank = rep.rank == M;
  return rep;
}

}  // namespace vip

#endif
