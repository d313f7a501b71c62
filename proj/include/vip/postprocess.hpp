#ifndef VIP_POSTPROCESS_HPP
#define VIP_POSTPROCESS_HPP

#include <Eigen/SparseLU>

#include <vector>

#include "vip/saddle.hpp"

namespace vip {

/// omega(y) = dv/dx - du/dy of Gamma U at each point.
template <class Window>
Eigen::VectorXd compute_vorticity(const ShapeFunctions<Window>& shape, const FlowField& field,
                                  const std::vector<Point>& points) {
  detail::require_degree(shape.basis(), 1, "vorticity");
  const auto N = static_cast<Eigen::Index>(shape.nodes().size());
  if (field.size() != N) throw Error(ErrorKind::DimensionMismatch, "field does not match the node set");
  Eigen::VectorXd w(static_cast<Eigen::Index>(points.size()));
  for (std::size_t J = 0; J < points.size(); ++J) {
    const ShapeRow r = detail::evaluate_row(shape, points[J], kFirst, J);
    double s = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      s += r.values(kk, kColDx) * field.v()[r.nodes[k]] - r.values(kk, kColDy) * field.u()[r.nodes[k]];
    }
    w[static_cast<Eigen::Index>(J)] = s;
  }
  return w;
}

/// Solves -Lap psi = omega for node coefficients, with omega given at the
/// virtual points of `grid`. On periodic domains psi has zero mean; with
/// boundaries psi = 0 on the boundary nodes (enclosed flow).
template <class Window>
Eigen::VectorXd solve_streamfunction(const ShapeFunctions<Window>& shape, const NodeSet& nodes, const VirtualGrid& grid,
                                     const Eigen::VectorXd& omega) {
  const auto N = static_cast<Eigen::Index>(nodes.size());
  const auto M = static_cast<Eigen::Index>(grid.size());
  if (omega.size() != M) throw Error(ErrorKind::DimensionMismatch, "vorticity must be sampled at the virtual points");
  std::vector<int> boundary;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes.role(i) == NodeRole::Boundary) boundary.push_back(static_cast<int>(i));
  }
  const auto nb = static_cast<Eigen::Index>(boundary.size());
  const bool periodic = nb == 0;
  const Eigen::Index rows = M + nb + (periodic ? 1 : 0);
  const Eigen::Index cols = N + (periodic ? 1 : 0);
  if (rows != cols) {
    throw Error(ErrorKind::DimensionMismatch, "stream function needs as many nodes as collocation points");
  }

  const SparseMatrix lap = assemble_laplacian_direct(shape, grid.points());
  Triplets trip;
  for (Eigen::Index r = 0; r < lap.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(lap, r); it; ++it) trip.emplace_back(it.row(), it.col(), -it.value());
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  rhs.head(M) = omega;
  if (periodic) {
    for (Eigen::Index i = 0; i < N; ++i) trip.emplace_back(M, i, 1.0);
    for (Eigen::Index J = 0; J < M; ++J) trip.emplace_back(J, N, 1.0);
  } else {
    std::vector<Point> bpts;
    for (int i : boundary) bpts.push_back(nodes[i]);
    const SparseMatrix gb = assemble_interpolation(shape, bpts);
    for (Eigen::Index r = 0; r < gb.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(gb, r); it; ++it) trip.emplace_back(M + it.row(), it.col(), it.value());
    }
  }
  Eigen::SparseMatrix<double> a(rows, cols);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "stream function: " + lu.lastErrorMessage());
  const Eigen::VectorXd x = lu.solve(rhs);
  Eigen::VectorXd psi = x.head(N);
  if (periodic) psi.array() -= psi.mean();
  return psi;
}

template <class Window>
Eigen::VectorXd compute_streamfunction(const ShapeFunctions<Window>& shape, const NodeSet& nodes, double h,
                                       const FlowField& field) {
  const VirtualGrid grid(nodes.domain(), h);
  return solve_streamfunction(shape, nodes, grid, compute_vorticity(shape, field, grid.points()));
}

/// Gamma applied to a coefficient vector at arbitrary points.
template <class Window>
Eigen::VectorXd evaluate_field(const ShapeFunctions<Window>& shape, const Eigen::VectorXd& coeffs,
                               const std::vector<Point>& points) {
  return assemble_interpolation(shape, points) * coeffs;
}

enum class Centerline { Vertical, Horizontal };

struct CenterlineSample {
  double coord;
  double value;
};

/// Vertical: Gamma u along x = position, y from lo to hi. Horizontal: Gamma v
/// along y = position. `samples` equispaced points including both ends.
template <class Window>
std::vector<CenterlineSample> extract_centerline(const ShapeFunctions<Window>& shape, const FlowField& field,
                                                 Centerline axis, double position, int samples) {
  if (samples < 2) throw Error(ErrorKind::Config, "a centerline needs at least two samples");
  const Domain& d = shape.nodes().domain();
  const int along = axis == Centerline::Vertical ? 1 : 0;
  const int across = 1 - along;
  if (position < d.lo()[across] || position > d.hi()[across]) {
    throw Error(ErrorKind::Config, "centerline position lies outside the domain");
  }
  std::vector<Point> pts(static_cast<std::size_t>(samples));
  std::vector<double> coord(pts.size());
  for (int s = 0; s < samples; ++s) {
    const double t = static_cast<double>(s) / (samples - 1);
    coord[s] = s == samples - 1 ? d.hi()[along] : d.lo()[along] + t * (d.hi()[along] - d.lo()[along]);
    pts[s][along] = coord[s];
    pts[s][across] = position;
  }
  const Eigen::VectorXd vals = evaluate_field(shape, Eigen::VectorXd(axis == Centerline::Vertical ? field.u() : field.v()), pts);
  std::vector<CenterlineSample> out(pts.size());
  for (std::size_t s = 0; s < pts.size(); ++s) out[s] = {coord[s], vals[static_cast<Eigen::Index>(s)]};
  return out;
}

}  // namespace vip

#endif
