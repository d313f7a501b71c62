#ifndef VIP_SADDLE_HPP
#define VIP_SADDLE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <vector>

#include "vip/operators.hpp"

namespace vip {

enum class LaplacianMode { Composite, Direct };
enum class GradientMode { Staggered, Direct };

inline const char* to_string(LaplacianMode m) { return m == LaplacianMode::Composite ? "composite" : "direct"; }
inline const char* to_string(GradientMode m) { return m == GradientMode::Staggered ? "staggered" : "direct"; }

struct AssemblyConfig {
  LaplacianMode laplacian = LaplacianMode::Composite;
  GradientMode gradient = GradientMode::Staggered;
  int degree = 2;
  double dilation = 2.6;  // rho / h
  double viscosity = 1.0;
  bool check_realization = true;
};

/// Velocity coefficients (u_1..u_N, v_1..v_N) and pressure coefficients.
struct FlowField {
  Eigen::VectorXd U;
  Eigen::VectorXd P;

  static FlowField zero(Eigen::Index n) { return {Eigen::VectorXd::Zero(2 * n), Eigen::VectorXd::Zero(n)}; }
  Eigen::Index size() const { return P.size(); }
  auto u() const { return U.head(P.size()); }
  auto v() const { return U.tail(P.size()); }
};

using VectorField = std::function<Point(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// One null direction of the discrete system: a unit vector on the unknowns
/// (right null vector) and a unit compatibility direction on the equations,
/// along which an incompatible right-hand side is absorbed.
struct Gauge {
  std::string name;
  Eigen::VectorXd unknowns;
  Eigen::VectorXd equations;
};

/// Discrete Stokes / Oseen system on a node set with virtual lattice T:
///
///   (-nu A + C) U + B_p P          = F        momentum at y_J         2M rows
///   B_d U                          = 0        staggered continuity    M rows
///   Gamma U(x_b)                   = g        Dirichlet velocity      2 nb rows
///   n.(-nu Lap U + C U + grad P)(x_b) = n.f   normal momentum         nb rows
///
/// The last two blocks exist only on non-periodic boundaries (x_b ranges over
/// the boundary nodes). Gauges are kept separately and appended by the solver.
class SaddleSystem {
 public:
  SaddleSystem(const NodeSet& nodes, double h, AssemblyConfig config)
      : nodes_(&nodes),
        config_(config),
        grid_(nodes.domain(), h),
        stencil_(staggered_points(grid_)),
        shape_(nodes, PolynomialBasis(config.degree), config.dilation * h) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes.role(i) == NodeRole::Boundary) boundary_.push_back(static_cast<int>(i));
    }
    const Eigen::Index N = num_nodes(), M = num_virtual(), nb = num_boundary();
    if (M + nb > N) {
      throw Error(ErrorKind::SizeMismatch, std::to_string(N) + " nodes for " + std::to_string(M + nb) +
                                               " collocation points");
    }
    const auto points = grid_.points();
    if (config.check_realization) {
      const auto rep = realization_check(shape_, points);
      if (!rep.full_row_rank) {
        throw Error(ErrorKind::RealizationFailure,
                    "interpolation matrix has rank " + std::to_string(rep.rank) + " < " + std::to_string(M));
      }
    }

    div_ = assemble_divergence_staggered(shape_, stencil_);
    grad_ = config.gradient == GradientMode::Staggered ? assemble_gradient_staggered(shape_, stencil_)
                                                       : assemble_gradient_direct(shape_, points);
    if (config.laplacian == LaplacianMode::Composite) {
      const SparseMatrix d = config.gradient == GradientMode::Staggered ? grad_ : assemble_gradient_staggered(shape_, stencil_);
      laplacian_ = assemble_laplacian_composite(div_, d);
    } else {
      laplacian_ = block_diagonal2(assemble_laplacian_direct(shape_, points));
    }
    convection_ = SparseMatrix(2 * M, 2 * N);

    if (nb > 0) {
      std::vector<Point> bpts;
      bpts.reserve(boundary_.size());
      for (int i : boundary_) bpts.push_back(nodes[i]);
      boundary_interp_ = assemble_interpolation(shape_, bpts);
      boundary_laplacian_ = assemble_laplacian_direct(shape_, bpts);
      boundary_gradient_ = assemble_gradient_direct(shape_, bpts);
      boundary_convection_ = SparseMatrix(2 * nb, 2 * N);
    }
    find_gauges();
  }

  const NodeSet& nodes() const { return *nodes_; }
  const AssemblyConfig& config() const { return config_; }
  const VirtualGrid& grid() const { return grid_; }
  const StaggeredStencil& stencil() const { return stencil_; }
  const ShapeFunctions<>& shape() const { return shape_; }
  const std::vector<int>& boundary_nodes() const { return boundary_; }

  Eigen::Index num_nodes() const { return static_cast<Eigen::Index>(nodes_->size()); }
  Eigen::Index num_virtual() const { return static_cast<Eigen::Index>(grid_.size()); }
  Eigen::Index num_boundary() const { return static_cast<Eigen::Index>(boundary_.size()); }
  Eigen::Index num_unknowns() const { return 3 * num_nodes(); }
  Eigen::Index num_equations() const { return 3 * num_virtual() + 3 * num_boundary(); }

  /// First row of each block.
  Eigen::Index continuity_row() const { return 2 * num_virtual(); }
  Eigen::Index dirichlet_row() const { return 3 * num_virtual(); }
  Eigen::Index boundary_momentum_row() const { return 3 * num_virtual() + 2 * num_boundary(); }

  /// Velocity Laplacian A (2M x 2N), pressure block B_p (2M x N), staggered divergence B_d (M x 2N).
  const SparseMatrix& laplacian() const { return laplacian_; }
  const SparseMatrix& pressure_block() const { return grad_; }
  const SparseMatrix& divergence() const { return div_; }
  const std::vector<Gauge>& gauges() const { return gauges_; }
  double viscosity() const { return config_.viscosity; }

  void set_viscosity(double nu) { config_.viscosity = nu; }

  /// Linearized convection blocks: at the virtual points (2M x 2N, x-rows
  /// then y-rows) and at the boundary nodes (2 nb x 2N).
  void set_convection(SparseMatrix interior, SparseMatrix boundary) {
    if (interior.rows() != 2 * num_virtual() || interior.cols() != 2 * num_nodes() ||
        boundary.rows() != 2 * num_boundary() || boundary.cols() != 2 * num_nodes()) {
      throw Error(ErrorKind::DimensionMismatch, "convection blocks have the wrong shape");
    }
    convection_ = std::move(interior);
    boundary_convection_ = std::move(boundary);
  }

  /// The assembled system matrix, without gauges.
  SparseMatrix matrix() const {
    const Eigen::Index N = num_nodes(), nb = num_boundary();
    const double nu = config_.viscosity;
    Triplets trip;
    append(trip, laplacian_, 0, 0, -nu);
    append(trip, convection_, 0, 0, 1.0);
    append(trip, grad_, 0, 2 * N, 1.0);
    append(trip, div_, continuity_row(), 0, 1.0);
    if (nb > 0) {
      append(trip, boundary_interp_, dirichlet_row(), 0, 1.0);
      append(trip, boundary_interp_, dirichlet_row() + nb, N, 1.0);
      const Eigen::Index r0 = boundary_momentum_row();
      for (Eigen::Index k = 0; k < nb; ++k) {
        const Point& n = nodes_->normal(boundary_[k]);
        for (int a = 0; a < 2; ++a) {
          if (n[a] == 0.0) continue;
          append_row(trip, boundary_laplacian_, k, r0 + k, a * N, -nu * n[a]);
          append_row(trip, boundary_convection_, a * nb + k, r0 + k, 0, n[a]);
          append_row(trip, boundary_gradient_, a * nb + k, r0 + k, 2 * N, n[a]);
        }
      }
    }
    SparseMatrix k(num_equations(), num_unknowns());
    k.setFromTriplets(trip.begin(), trip.end());
    k.makeCompressed();
    return k;
  }

  /// Right-hand side for momentum forcing f and Dirichlet data g.
  Eigen::VectorXd rhs(const VectorField& f, const VectorField& g = {}) const {
    const Eigen::Index M = num_virtual(), nb = num_boundary();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(num_equations());
    b.head(2 * M) = sample_forcing(f);
    for (Eigen::Index k = 0; k < nb; ++k) {
      const Point& x = (*nodes_)[boundary_[k]];
      const Point gv = g ? g(x) : Point::Zero();
      b[dirichlet_row() + k] = gv[0];
      b[dirichlet_row() + nb + k] = gv[1];
      b[boundary_momentum_row() + k] = nodes_->normal(boundary_[k]).dot(f(x));
    }
    return b;
  }

  /// Right-hand side from momentum forcing already sampled at the virtual
  /// points (2M, x-rows then y-rows); only valid without boundaries.
  Eigen::VectorXd rhs(const Eigen::VectorXd& F) const {
    if (F.size() != 2 * num_virtual()) throw Error(ErrorKind::DimensionMismatch, "forcing must have 2M entries");
    if (num_boundary() > 0) throw Error(ErrorKind::DimensionMismatch, "boundary data required");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(num_equations());
    b.head(F.size()) = F;
    return b;
  }

  Eigen::VectorXd sample_forcing(const VectorField& f) const {
    const Eigen::Index M = num_virtual();
    Eigen::VectorXd F(2 * M);
    for (Eigen::Index J = 0; J < M; ++J) {
      const Point v = f(grid_.point(static_cast<std::size_t>(J)));
      F[J] = v[0];
      F[M + J] = v[1];
    }
    return F;
  }

  /// Momentum forcing part (2M) of a right-hand side.
  Eigen::VectorXd forcing_part(const Eigen::VectorXd& b) const { return b.head(2 * num_virtual()); }

  Eigen::VectorXd pack(const FlowField& f) const {
    Eigen::VectorXd x(num_unknowns());
    x << f.U, f.P;
    return x;
  }

  FlowField unpack(const Eigen::VectorXd& x) const {
    const Eigen::Index N = num_nodes();
    return {x.head(2 * N), x.tail(N)};
  }

 private:
  static void append(Triplets& trip, const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0, double w) {
    if (w == 0.0) return;
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) trip.emplace_back(r0 + it.row(), c0 + it.col(), w * it.value());
    }
  }

  static void append_row(Triplets& trip, const SparseMatrix& m, Eigen::Index src, Eigen::Index dst, Eigen::Index c0,
                         double w) {
    for (SparseMatrix::InnerIterator it(m, src); it; ++it) trip.emplace_back(dst, c0 + it.col(), w * it.value());
  }

  // Constant pressure is always null. On exact, even, fully periodic lattices
  // the checkerboards (-1)^k, (-1)^j, (-1)^(k+j) are null for both co-located
  // gradients, constant velocities are null, and velocity checkerboards are
  // null for the composite Laplacian. Periodic compatibility directions mirror
  // the null vectors; with boundaries the pressure constant is compensated
  // along the normal-momentum rows.
  void find_gauges() {
    const Eigen::Index N = num_nodes(), M = num_virtual(), nb = num_boundary();
    const bool periodic = nb == 0;
    const auto& lat = nodes_->lattice();
    const bool lattice_ok = nodes_->domain().fully_periodic() && lat && lat->exact && N == M &&
                            lat->counts[0] % 2 == 0 && lat->counts[1] % 2 == 0;

    std::vector<std::pair<std::string, Eigen::VectorXd>> modes{{"const", Eigen::VectorXd::Ones(N).normalized()}};
    if (lattice_ok) {
      const char* names[] = {"", "checker_x", "checker_y", "checker_xy"};
      for (int mode = 1; mode < 4; ++mode) {
        Eigen::VectorXd c(N);
        for (Eigen::Index I = 0; I < N; ++I) {
          const auto [k, j] = lat->index[I];
          c[I] = ((mode & 1 ? k : 0) + (mode & 2 ? j : 0)) % 2 ? -1.0 : 1.0;
        }
        modes.emplace_back(names[mode], c.normalized());
      }
    }

    const SparseMatrix k = matrix();
    const double scale = k.cwiseAbs().sum() / static_cast<double>(std::max<Eigen::Index>(1, k.rows()));
    auto is_null = [&](const Eigen::VectorXd& x) { return (k * x).cwiseAbs().maxCoeff() <= 1e-9 * scale; };

    if (periodic && nodes_->domain().fully_periodic()) {
      for (int comp = 0; comp < 2; ++comp) {
        for (const auto& [name, m] : modes) {
          Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * N);
          x.segment(comp * N, N) = m;
          if (!is_null(x)) continue;
          Eigen::VectorXd e = Eigen::VectorXd::Zero(num_equations());
          e.segment(comp * M, M) = m;
          gauges_.push_back({std::string(comp == 0 ? "u_" : "v_") + name, x, e});
        }
      }
    }
    for (const auto& [name, m] : modes) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * N);
      x.tail(N) = m;
      if (!is_null(x)) continue;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(num_equations());
      if (periodic) {
        e.segment(continuity_row(), M) = m;
      } else {
        e.segment(boundary_momentum_row(), nb).setConstant(1.0 / std::sqrt(static_cast<double>(nb)));
      }
      gauges_.push_back({"p_" + name, x, e});
    }
  }

  const NodeSet* nodes_;
  AssemblyConfig config_;
  VirtualGrid grid_;
  StaggeredStencil stencil_;
  ShapeFunctions<> shape_;
  std::vector<int> boundary_;
  SparseMatrix laplacian_, grad_, div_, convection_;
  SparseMatrix boundary_interp_, boundary_laplacian_, boundary_gradient_, boundary_convection_;
  std::vector<Gauge> gauges_;
};

}  // namespace vip

#endif
