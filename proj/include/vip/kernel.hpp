#ifndef VIP_KERNEL_HPP
#define VIP_KERNEL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vip/error.hpp"
#include "vip/geometry.hpp"
#include "vip/nodes.hpp"

namespace vip {

/// Monomials x^a y^b with a + b <= m, graded lexicographic:
/// 1, x, y, x^2, xy, y^2, x^3, ...
class PolynomialBasis {
 public:
  explicit PolynomialBasis(int degree) : degree_(degree) {
    if (degree < 0) throw Error(ErrorKind::Config, "negative polynomial degree");
    for (int d = 0; d <= degree; ++d) {
      for (int b = 0; b <= d; ++b) exponents_.push_back({d - b, b});
    }
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<std::array<int, 2>>& exponents() const { return exponents_; }

  Eigen::VectorXd eval(const Point& z) const {
    Eigen::VectorXd p(size());
    for (int k = 0; k < size(); ++k) p[k] = ipow(z[0], exponents_[k][0]) * ipow(z[1], exponents_[k][1]);
    return p;
  }

  /// Values and partial derivatives up to second order.
  /// Columns: 0 value, 1 d/dz1, 2 d/dz2, 3 d2/dz1^2, 4 d2/dz1dz2, 5 d2/dz2^2.
  Eigen::Matrix<double, Eigen::Dynamic, 6> eval_derivatives(const Point& z) const {
    Eigen::Matrix<double, Eigen::Dynamic, 6> out(size(), 6);
    for (int k = 0; k < size(); ++k) {
      const int a = exponents_[k][0];
      const int b = exponents_[k][1];
      const double xa = ipow(z[0], a), yb = ipow(z[1], b);
      const double dxa = a >= 1 ? a * ipow(z[0], a - 1) : 0.0;
      const double dyb = b >= 1 ? b * ipow(z[1], b - 1) : 0.0;
      const double ddxa = a >= 2 ? a * (a - 1) * ipow(z[0], a - 2) : 0.0;
      const double ddyb = b >= 2 ? b * (b - 1) * ipow(z[1], b - 2) : 0.0;
      out(k, 0) = xa * yb;
      out(k, 1) = dxa * yb;
      out(k, 2) = xa * dyb;
      out(k, 3) = ddxa * yb;
      out(k, 4) = dxa * dyb;
      out(k, 5) = xa * ddyb;
    }
    return out;
  }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  int degree_;
  std::vector<std::array<int, 2>> exponents_;
};

/// Value, gradient and Hessian (xx, xy, yy) of the window at a scaled point.
struct WindowSample {
  double value = 0.0;
  std::array<double, 2> grad{0.0, 0.0};
  std::array<double, 3> hess{0.0, 0.0, 0.0};
};

/// Tensor-product cubic B-spline window, support |z|_inf < 1, C^2 on R^2.
///
/// Per axis w(r) = 2/3 - 4r^2 + 4r^3 on [0, 1/2], 4/3 (1-r)^3 on [1/2, 1].
/// The normalization makes the window integrate to one.
struct CubicBSplineWindow {
  static constexpr double normalization = 4.0;

  /// 1D profile and its first two derivatives at signed coordinate t.
  static std::array<double, 3> profile(double t) {
    const double r = std::abs(t);
    const double s = t < 0.0 ? -1.0 : 1.0;
    if (r >= 1.0) return {0.0, 0.0, 0.0};
    if (r <= 0.5) {
      return {2.0 / 3.0 - 4.0 * r * r + 4.0 * r * r * r, s * (-8.0 * r + 12.0 * r * r), -8.0 + 24.0 * r};
    }
    const double u = 1.0 - r;
    return {4.0 / 3.0 * u * u * u, -s * 4.0 * u * u, 8.0 * u};
  }

  static WindowSample eval(const Point& z) {
    WindowSample out;
    if (std::abs(z[0]) >= 1.0 || std::abs(z[1]) >= 1.0) return out;
    const auto wx = profile(z[0]);
    const auto wy = profile(z[1]);
    const double c = normalization;
    out.value = c * wx[0] * wy[0];
    out.grad = {c * wx[1] * wy[0], c * wx[0] * wy[1]};
    out.hess = {c * wx[2] * wy[0], c * wx[1] * wy[1], c * wx[0] * wy[2]};
    return out;
  }
};

/// Bit flags selecting which shape-function derivatives to compute.
enum Deriv : std::uint32_t {
  kValue = 1u << 0,
  kDx = 1u << 1,
  kDy = 1u << 2,
  kDxx = 1u << 3,
  kDxy = 1u << 4,
  kDyy = 1u << 5,
  kFirst = kValue | kDx | kDy,
  kAll = kValue | kDx | kDy | kDxx | kDxy | kDyy,
};

/// Column index in ShapeRow::values for each derivative.
enum DerivColumn : int { kColValue = 0, kColDx = 1, kColDy = 2, kColDxx = 3, kColDxy = 4, kColDyy = 5 };

/// Shape functions of all nodes supporting one evaluation point.
struct ShapeRow {
  std::vector<int> nodes;                           // ascending
  Eigen::Matrix<double, Eigen::Dynamic, 6> values;  // one row per node, DerivColumn layout
  std::uint32_t mask = 0;

  double apply(std::span<const double> coefficients, int column = kColValue) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += values(static_cast<Eigen::Index>(k), column) * coefficients[nodes[k]];
    return s;
  }
};

/// MLSRK shape functions Psi_I on a node set:
///   M(x)   = sum_I P(z_I) P(z_I)^T Phi(z_I) / rho^2,   z_I = (x - x_I)/rho
///   Psi_I  = P(0)^T M(x)^{-1} P(z_I) Phi(z_I) / rho^2
/// with exact derivatives obtained by differentiating M^{-1} as well.
/// Holds a pointer to the node set, which must outlive it.
template <class Window = CubicBSplineWindow>
class ShapeFunctions {
 public:
  ShapeFunctions(const NodeSet& nodes, PolynomialBasis basis, double rho)
      : nodes_(&nodes), basis_(std::move(basis)), rho_(rho) {
    if (!(rho > 0.0)) throw Error(ErrorKind::Config, "dilation must be positive");
  }

  const NodeSet& nodes() const { return *nodes_; }
  const PolynomialBasis& basis() const { return basis_; }
  double rho() const { return rho_; }

  std::vector<int> support(const Point& x) const { return nodes_->neighbors(x, rho_); }

  Eigen::MatrixXd moment_matrix(const Point& x) const {
    const auto idx = support(x);
    check_count(x, idx);
    const int q = basis_.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, q);
    const double scale = 1.0 / (rho_ * rho_);
    for (int i : idx) {
      const Point z = nodes_->domain().displacement(x, (*nodes_)[i]) / rho_;
      const double phi = Window::eval(z).value * scale;
      const Eigen::VectorXd p = basis_.eval(z);
      m.noalias() += phi * p * p.transpose();
    }
    return 0.5 * (m + m.transpose());
  }

  /// Shape functions (and the requested derivatives) at x.
  ShapeRow evaluate(const Point& x, std::uint32_t mask = kValue) const {
    const bool first = mask & (kDx | kDy | kDxx | kDxy | kDyy);
    const bool second = mask & (kDxx | kDxy | kDyy);
    const auto idx = support(x);
    check_count(x, idx);
    const int q = basis_.size();
    const int n = static_cast<int>(idx.size());
    const double scale = 1.0 / (rho_ * rho_);
    const double inv_rho = 1.0 / rho_;

    // c_I(x) = P(z_I) Phi(z_I) / rho^2 and its x-derivatives, in DerivColumn layout.
    std::vector<Eigen::Matrix<double, Eigen::Dynamic, 6>> c(n);
    std::vector<Eigen::VectorXd> p(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, q);
    std::array<Eigen::MatrixXd, 5> dm;  // dx, dy, dxx, dxy, dyy
    if (first) {
      for (auto& d : dm) d = Eigen::MatrixXd::Zero(q, q);
    }
    for (int k = 0; k < n; ++k) {
      const Point z = nodes_->domain().displacement(x, (*nodes_)[idx[k]]) * inv_rho;
      const WindowSample w = Window::eval(z);
      const auto pd = basis_.eval_derivatives(z);
      p[k] = pd.col(0);
      auto& ck = c[k];
      ck.resize(q, 6);
      ck.col(0) = pd.col(0) * w.value;
      ck.col(1) = (pd.col(1) * w.value + pd.col(0) * w.grad[0]) * inv_rho;
      ck.col(2) = (pd.col(2) * w.value + pd.col(0) * w.grad[1]) * inv_rho;
      const double r2 = inv_rho * inv_rho;
      ck.col(3) = (pd.col(3) * w.value + 2.0 * pd.col(1) * w.grad[0] + pd.col(0) * w.hess[0]) * r2;
      ck.col(4) = (pd.col(4) * w.value + pd.col(1) * w.grad[1] + pd.col(2) * w.grad[0] + pd.col(0) * w.hess[1]) * r2;
      ck.col(5) = (pd.col(5) * w.value + 2.0 * pd.col(2) * w.grad[1] + pd.col(0) * w.hess[2]) * r2;
      ck *= scale;

      // M = sum c_I P_I^T; dP_I/dx = dP/dz / rho.
      m.noalias() += ck.col(0) * p[k].transpose();
      if (first) {
        const Eigen::VectorXd px = pd.col(1) * inv_rho, py = pd.col(2) * inv_rho;
        dm[0].noalias() += ck.col(1) * p[k].transpose() + ck.col(0) * px.transpose();
        dm[1].noalias() += ck.col(2) * p[k].transpose() + ck.col(0) * py.transpose();
        if (second) {
          const double r2 = inv_rho * inv_rho;
          const Eigen::VectorXd pxx = pd.col(3) * r2, pxy = pd.col(4) * r2, pyy = pd.col(5) * r2;
          dm[2].noalias() += ck.col(3) * p[k].transpose() + 2.0 * ck.col(1) * px.transpose() + ck.col(0) * pxx.transpose();
          dm[3].noalias() += ck.col(4) * p[k].transpose() + ck.col(1) * py.transpose() + ck.col(2) * px.transpose() +
                             ck.col(0) * pxy.transpose();
          dm[4].noalias() += ck.col(5) * p[k].transpose() + 2.0 * ck.col(2) * py.transpose() + ck.col(0) * pyy.transpose();
        }
      }
    }
    // M is symmetric in exact arithmetic; symmetrize the accumulated sums.
    m = 0.5 * (m + m.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
      throw Error(ErrorKind::SingularMoment, "moment matrix not positive definite at (" + std::to_string(x[0]) + ", " +
                                                 std::to_string(x[1]) + ")");
    }

    // b = M^{-1} P(0); Psi_I = b . c_I.
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(q);
    e1[0] = 1.0;
    const Eigen::VectorXd b = llt.solve(e1);
    Eigen::VectorXd bx, by, bxx, bxy, byy;
    if (first) {
      bx = -llt.solve(dm[0] * b);
      by = -llt.solve(dm[1] * b);
      if (second) {
        bxx = -llt.solve(dm[2] * b + 2.0 * dm[0] * bx);
        bxy = -llt.solve(dm[3] * b + dm[0] * by + dm[1] * bx);
        byy = -llt.solve(dm[4] * b + 2.0 * dm[1] * by);
      }
    }

    ShapeRow row;
    row.nodes = idx;
    row.mask = mask;
    row.values = Eigen::Matrix<double, Eigen::Dynamic, 6>::Zero(n, 6);
    for (int k = 0; k < n; ++k) {
      const auto& ck = c[k];
      row.values(k, kColValue) = b.dot(ck.col(0));
      if (mask & kDx) row.values(k, kColDx) = bx.dot(ck.col(0)) + b.dot(ck.col(1));
      if (mask & kDy) row.values(k, kColDy) = by.dot(ck.col(0)) + b.dot(ck.col(2));
      if (mask & kDxx) row.values(k, kColDxx) = bxx.dot(ck.col(0)) + 2.0 * bx.dot(ck.col(1)) + b.dot(ck.col(3));
      if (mask & kDxy) {
        row.values(k, kColDxy) = bxy.dot(ck.col(0)) + bx.dot(ck.col(2)) + by.dot(ck.col(1)) + b.dot(ck.col(4));
      }
      if (mask & kDyy) row.values(k, kColDyy) = byy.dot(ck.col(0)) + 2.0 * by.dot(ck.col(2)) + b.dot(ck.col(5));
    }
    return row;
  }

  /// Gamma u (x) = sum_I Psi_I(x) u_I.
  double project(std::span<const double> coefficients, const Point& x, int column = kColValue) const {
    const std::uint32_t mask = column == kColValue ? kValue : kAll;
    return evaluate(x, mask).apply(coefficients, column);
  }

 private:
  void check_count(const Point& x, const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) < basis_.size()) {
      throw Error(ErrorKind::InsufficientNeighbors,
                  std::to_string(idx.size()) + " nodes in support at (" + std::to_string(x[0]) + ", " +
                      std::to_string(x[1]) + "), need " + std::to_string(basis_.size()));
    }
  }

  const NodeSet* nodes_;
  PolynomialBasis basis_;
  double rho_;
};

}  // namespace vip

#endif
