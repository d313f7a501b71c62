#ifndef VIP_OPERATORS_HPP
#define VIP_OPERATORS_HPP

#include <Eigen/SparseCore>
#include <unsupported/Eigen/SparseExtra>

#include <cmath>
#include <string>
#include <vector>

#include "vip/kernel.hpp"
#include "vip/virtual_grid.hpp"

namespace vip {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

inline constexpr double kPruneTolerance = 1e-14;

/// Shape-function rows at a list of evaluation points.
struct ShapeTable {
  std::vector<Point> points;
  std::vector<ShapeRow> rows;
  std::uint32_t mask = 0;
};

namespace detail {

inline std::string where(std::size_t row, const Point& x) {
  return "row " + std::to_string(row) + " at (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + "): ";
}

template <class Window>
ShapeRow evaluate_row(const ShapeFunctions<Window>& shape, const Point& x, std::uint32_t mask, std::size_t row) {
  try {
    return shape.evaluate(x, mask);
  } catch (const Error& e) {
    throw Error(e.kind(), where(row, x) + e.what());
  }
}

inline SparseMatrix finish(Eigen::Index rows, Eigen::Index cols, const Triplets& trip) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune([](Eigen::Index, Eigen::Index, double v) { return std::abs(v) >= kPruneTolerance; });
  m.makeCompressed();
  return m;
}

inline void require_degree(const PolynomialBasis& basis, int m, const char* what) {
  if (basis.degree() < m) {
    throw Error(ErrorKind::DegreeTooLow,
                std::string(what) + " needs degree >= " + std::to_string(m) + ", got " + std::to_string(basis.degree()));
  }
}

}  // namespace detail

template <class Window>
ShapeTable build_shape_table(const ShapeFunctions<Window>& shape, std::vector<Point> points, std::uint32_t mask) {
  ShapeTable t;
  t.mask = mask;
  t.rows.reserve(points.size());
  for (std::size_t J = 0; J < points.size(); ++J) t.rows.push_back(detail::evaluate_row(shape, points[J], mask, J));
  t.points = std::move(points);
  return t;
}

/// Sum of the selected derivative columns, with weights, as a sparse operator.
inline SparseMatrix table_operator(const ShapeTable& t, Eigen::Index cols,
                                   std::initializer_list<std::pair<int, double>> terms, Eigen::Index row_offset = 0,
                                   Eigen::Index total_rows = -1) {
  Triplets trip;
  for (std::size_t J = 0; J < t.rows.size(); ++J) {
    const ShapeRow& r = t.rows[J];
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      double v = 0.0;
      for (const auto& [col, w] : terms) v += w * r.values(static_cast<Eigen::Index>(k), col);
      trip.emplace_back(row_offset + static_cast<Eigen::Index>(J), r.nodes[k], v);
    }
  }
  const Eigen::Index rows = total_rows < 0 ? row_offset + static_cast<Eigen::Index>(t.rows.size()) : total_rows;
  return detail::finish(rows, cols, trip);
}

/// Row J: Gamma(.)(y_J).
template <class Window>
SparseMatrix assemble_interpolation(const ShapeFunctions<Window>& shape, const std::vector<Point>& eval_points) {
  const auto t = build_shape_table(shape, eval_points, kValue);
  return table_operator(t, static_cast<Eigen::Index>(shape.nodes().size()), {{kColValue, 1.0}});
}

/// Row J: (Psi^[2,0] + Psi^[0,2])(y_J).
template <class Window>
SparseMatrix assemble_laplacian_direct(const ShapeFunctions<Window>& shape, const std::vector<Point>& eval_points) {
  detail::require_degree(shape.basis(), 2, "direct Laplacian");
  const auto t = build_shape_table(shape, eval_points, kValue | kDxx | kDyy);
  return table_operator(t, static_cast<Eigen::Index>(shape.nodes().size()), {{kColDxx, 1.0}, {kColDyy, 1.0}});
}

/// G = (Psi^[1,0]; Psi^[0,1]), 2M x N.
template <class Window>
SparseMatrix assemble_gradient_direct(const ShapeFunctions<Window>& shape, const std::vector<Point>& eval_points) {
  detail::require_degree(shape.basis(), 1, "direct gradient");
  const auto t = build_shape_table(shape, eval_points, kFirst);
  const auto N = static_cast<Eigen::Index>(shape.nodes().size());
  const auto M = static_cast<Eigen::Index>(eval_points.size());
  Triplets trip;
  for (Eigen::Index J = 0; J < M; ++J) {
    const ShapeRow& r = t.rows[J];
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      trip.emplace_back(J, r.nodes[k], r.values(static_cast<Eigen::Index>(k), kColDx));
      trip.emplace_back(M + J, r.nodes[k], r.values(static_cast<Eigen::Index>(k), kColDy));
    }
  }
  return detail::finish(2 * M, N, trip);
}

namespace detail {

/// Half-spacing differences (Psi(z+) - Psi(z-)) / h, one triplet list per axis.
template <class Window>
std::array<Triplets, 2> staggered_differences(const ShapeFunctions<Window>& shape, const StaggeredStencil& s) {
  std::array<Triplets, 2> out;
  const double inv_h = 1.0 / s.h;
  for (std::size_t J = 0; J < s.size(); ++J) {
    for (int axis = 0; axis < 2; ++axis) {
      const int plus = axis == 0 ? StaggeredStencil::kXPlus : StaggeredStencil::kYPlus;
      const int minus = plus + 1;
      const ShapeRow rp = evaluate_row(shape, s(J, plus), kValue, J);
      const ShapeRow rm = evaluate_row(shape, s(J, minus), kValue, J);
      const auto row = static_cast<Eigen::Index>(J);
      for (std::size_t k = 0; k < rp.nodes.size(); ++k) {
        out[axis].emplace_back(row, rp.nodes[k], inv_h * rp.values(static_cast<Eigen::Index>(k), kColValue));
      }
      for (std::size_t k = 0; k < rm.nodes.size(); ++k) {
        out[axis].emplace_back(row, rm.nodes[k], -inv_h * rm.values(static_cast<Eigen::Index>(k), kColValue));
      }
    }
  }
  return out;
}

}  // namespace detail

/// D*: M x 2N, (D*U)_J = [Gamma u(z_J1+) - Gamma u(z_J1-)]/h + [Gamma v(z_J2+) - Gamma v(z_J2-)]/h.
template <class Window>
SparseMatrix assemble_divergence_staggered(const ShapeFunctions<Window>& shape, const StaggeredStencil& s) {
  auto diff = detail::staggered_differences(shape, s);
  const auto N = static_cast<Eigen::Index>(shape.nodes().size());
  Triplets trip = std::move(diff[0]);
  for (const auto& t : diff[1]) trip.emplace_back(t.row(), N + t.col(), t.value());
  return detail::finish(static_cast<Eigen::Index>(s.size()), 2 * N, trip);
}

/// D: 2M x N, rows (J, i) = [Gamma p(z_Ji+) - Gamma p(z_Ji-)]/h.
template <class Window>
SparseMatrix assemble_gradient_staggered(const ShapeFunctions<Window>& shape, const StaggeredStencil& s) {
  auto diff = detail::staggered_differences(shape, s);
  const auto M = static_cast<Eigen::Index>(s.size());
  Triplets trip = std::move(diff[0]);
  for (const auto& t : diff[1]) trip.emplace_back(M + t.row(), t.col(), t.value());
  return detail::finish(2 * M, static_cast<Eigen::Index>(shape.nodes().size()), trip);
}

/// Scalar composite Laplacian D*_x D_x + D*_y D_y (M x N).
///
/// The gradient values at virtual point J are fed back into D* as the
/// coefficients of node J, which requires N == M.
inline SparseMatrix assemble_laplacian_composite_scalar(const SparseMatrix& div, const SparseMatrix& grad) {
  const Eigen::Index M = div.rows();
  const Eigen::Index N = grad.cols();
  if (div.cols() != 2 * N || grad.rows() != 2 * M) {
    throw Error(ErrorKind::DimensionMismatch, "divergence " + std::to_string(div.rows()) + "x" +
                                                  std::to_string(div.cols()) + " and gradient " +
                                                  std::to_string(grad.rows()) + "x" + std::to_string(grad.cols()) +
                                                  " are not built on the same stencil");
  }
  if (N != M) {
    throw Error(ErrorKind::DimensionMismatch, "composite Laplacian needs as many nodes as virtual points (" +
                                                  std::to_string(N) + " vs " + std::to_string(M) + ")");
  }
  const SparseMatrix dx_star = div.leftCols(N);
  const SparseMatrix dy_star = div.rightCols(N);
  const SparseMatrix dx = grad.topRows(M);
  const SparseMatrix dy = grad.bottomRows(M);
  SparseMatrix a = dx_star * dx + dy_star * dy;
  a.prune([](Eigen::Index, Eigen::Index, double v) { return std::abs(v) >= kPruneTolerance; });
  a.makeCompressed();
  return a;
}

/// Block-diagonal velocity Laplacian from a scalar one.
inline SparseMatrix block_diagonal2(const SparseMatrix& a) {
  Triplets trip;
  trip.reserve(2 * static_cast<std::size_t>(a.nonZeros()));
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      trip.emplace_back(it.row(), it.col(), it.value());
      trip.emplace_back(a.rows() + it.row(), a.cols() + it.col(), it.value());
    }
  }
  SparseMatrix out(2 * a.rows(), 2 * a.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

/// A = D*(D U) applied componentwise: 2M x 2N.
inline SparseMatrix assemble_laplacian_composite(const SparseMatrix& div, const SparseMatrix& grad) {
  return block_diagonal2(assemble_laplacian_composite_scalar(div, grad));
}

inline void write_matrix_market(const SparseMatrix& m, const std::string& path) {
  const Eigen::SparseMatrix<double> col_major = m;
  if (!Eigen::saveMarket(col_major, path)) throw Error(ErrorKind::Io, "cannot write " + path);
}

}  // namespace vip

#endif
