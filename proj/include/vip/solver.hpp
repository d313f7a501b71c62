#ifndef VIP_SOLVER_HPP
#define VIP_SOLVER_HPP

#include <Eigen/Dense>
#include <Eigen/SPQRSupport>
#include <Eigen/UmfPackSupport>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vip/saddle.hpp"

namespace vip {

struct SolveOptions {
  double tolerance = 1e-10;  // bound on the gauged relative residual
};

struct SolveReport {
  double residual = 0.0;             // ||K x - b|| / ||b|| on the ungauged system
  double compatible_residual = 0.0;  // same, after removing the incompatible part absorbed by the gauges
  double continuity_residual = 0.0;  // ||B_d U||
  std::vector<std::string> gauge_names;
  std::vector<double> gauge_residuals;  // c_i . x
  std::vector<double> multipliers;      // incompatible right-hand-side components
  int iterations = 0;
  double wall_time = 0.0;
  std::string method;
  Eigen::Index unknowns = 0;
  Eigen::Index nonzeros = 0;

  /// Flat key=value block. Timing is omitted unless asked for, so that the
  /// text is reproducible.
  std::string to_text(bool with_timing = false) const {
    std::ostringstream os;
    os.precision(17);
    os << "method=" << method << '\n'
       << "unknowns=" << unknowns << '\n'
       << "nonzeros=" << nonzeros << '\n'
       << "iterations=" << iterations << '\n'
       << "residual=" << residual << '\n'
       << "compatible_residual=" << compatible_residual << '\n'
       << "continuity_residual=" << continuity_residual << '\n';
    for (std::size_t i = 0; i < gauge_names.size(); ++i) {
      os << "gauge." << gauge_names[i] << ".residual=" << gauge_residuals[i] << '\n';
      os << "gauge." << gauge_names[i] << ".multiplier=" << multipliers[i] << '\n';
    }
    if (with_timing) os << "wall_time=" << wall_time << '\n';
    return os.str();
  }
};

namespace detail {

inline Eigen::SparseMatrix<double> bordered(const SparseMatrix& k, const std::vector<Gauge>& gauges) {
  const Eigen::Index m = k.rows(), n = k.cols(), g = static_cast<Eigen::Index>(gauges.size());
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(k.nonZeros()) + 2 * gauges.size() * static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < k.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(k, r); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index i = 0; i < g; ++i) {
    const auto& gi = gauges[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < n; ++c) {
      if (gi.unknowns[c] != 0.0) trip.emplace_back(m + i, c, gi.unknowns[c]);
    }
    for (Eigen::Index r = 0; r < m; ++r) {
      if (gi.equations[r] != 0.0) trip.emplace_back(r, n + i, gi.equations[r]);
    }
  }
  Eigen::SparseMatrix<double> b(m + g, n + g);
  b.setFromTriplets(trip.begin(), trip.end());
  b.makeCompressed();
  return b;
}

}  // namespace detail

/// Factorization of the gauged system, reusable across right-hand sides.
/// Square systems use the bordered matrix [[K, Y], [C, 0]] (C = gauge null
/// vectors, Y = compatibility directions) with UMFPACK (METIS ordering); rectangular
/// systems (more nodes than collocation points) take the minimum-norm
/// solution of [K; C] x = [b; 0] from a sparse QR of the transpose.
class StokesFactorization {
 public:
  explicit StokesFactorization(const SaddleSystem& sys, SolveOptions opt = {})
      : sys_(&sys), opt_(opt), k_(sys.matrix()) {
    const auto& gauges = sys.gauges();
    const Eigen::Index n = k_.cols(), m = k_.rows(), g = static_cast<Eigen::Index>(gauges.size());
    if (m == n) {
      lu_.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
      bordered_ = detail::bordered(k_, gauges);
      lu_.compute(bordered_);
      if (lu_.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "sparse LU failed");
      method_ = "bordered-umfpack-lu";
    } else {
      Triplets trip;
      for (Eigen::Index r = 0; r < k_.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(k_, r); it; ++it) trip.emplace_back(it.col(), it.row(), it.value());
      }
      for (Eigen::Index i = 0; i < g; ++i) {
        for (Eigen::Index c = 0; c < n; ++c) {
          if (gauges[i].unknowns[c] != 0.0) trip.emplace_back(c, m + i, gauges[i].unknowns[c]);
        }
      }
      Eigen::SparseMatrix<double> at(n, m + g);
      at.setFromTriplets(trip.begin(), trip.end());
      at.makeCompressed();
      qr_.compute(at);
      if (qr_.info() != Eigen::Success) throw Error(ErrorKind::SingularSystem, "sparse QR failed");
      if (qr_.rank() < m + g) {
        throw Error(ErrorKind::SingularSystem, "rectangular system has rank " + std::to_string(qr_.rank()) +
                                                   " < " + std::to_string(m + g));
      }
      r_ = qr_.matrixR().topLeftCorner(m + g, m + g);
      method_ = "min-norm-sparse-qr";
    }
  }

  StokesFactorization(const StokesFactorization&) = delete;
  StokesFactorization& operator=(const StokesFactorization&) = delete;

  const SparseMatrix& matrix() const { return k_; }
  bool bordered() const { return method_ == "bordered-umfpack-lu"; }

  /// Applies the inverse of the bordered matrix to a vector of length
  /// n + g (square systems only).
  Eigen::VectorXd solve_bordered(const Eigen::VectorXd& z) const { return lu_.solve(z); }

  std::pair<FlowField, SolveReport> solve(const Eigen::VectorXd& b) const {
    const auto t0 = std::chrono::steady_clock::now();
    const SaddleSystem& sys = *sys_;
    if (b.size() != sys.num_equations()) throw Error(ErrorKind::DimensionMismatch, "right-hand side size");
    if (!b.allFinite()) throw Error(ErrorKind::Config, "right-hand side is not finite");
    const auto& gauges = sys.gauges();
    const Eigen::Index n = k_.cols(), m = k_.rows(), g = static_cast<Eigen::Index>(gauges.size());
    SolveReport rep;
    rep.unknowns = n;
    rep.nonzeros = k_.nonZeros();
    rep.method = method_;

    Eigen::VectorXd x;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(g);
    if (m == n) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + g);
      rhs.head(m) = b;
      const Eigen::VectorXd sol = lu_.solve(rhs);
      x = sol.head(n);
      lambda = sol.tail(g);
    } else {
      // A^T P = Q R  =>  x = Q R^{-T} P^T [b; 0].
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + g);
      rhs.head(m) = b;
      const Eigen::VectorXd pb = qr_.colsPermutation().transpose() * rhs;
      Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
      full.head(m + g) = r_.transpose().triangularView<Eigen::Lower>().solve(pb);
      x = qr_.matrixQ() * full;
    }
    if (!x.allFinite()) throw Error(ErrorKind::SingularSystem, "solution is not finite");

    const double bn = std::max(b.norm(), std::numeric_limits<double>::min());
    Eigen::VectorXd r = k_ * x - b;
    rep.residual = r.norm() / bn;
    for (Eigen::Index i = 0; i < g; ++i) r += lambda[i] * gauges[i].equations;
    rep.compatible_residual = r.norm() / bn;
    rep.continuity_residual = r.segment(sys.continuity_row(), sys.num_virtual()).norm();
    for (Eigen::Index i = 0; i < g; ++i) {
      rep.gauge_names.push_back(gauges[i].name);
      rep.gauge_residuals.push_back(gauges[i].unknowns.dot(x));
      rep.multipliers.push_back(lambda[i]);
    }
    if (b.norm() > 0.0 && rep.compatible_residual > 1e3 * opt_.tolerance) {
      throw Error(ErrorKind::SingularSystem, "residual " + std::to_string(rep.compatible_residual) +
                                                 " after solve; the system is numerically singular");
    }
    rep.iterations = 1;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {sys.unpack(x), rep};
  }

 private:
  const SaddleSystem* sys_;
  SolveOptions opt_;
  SparseMatrix k_;
  std::string method_;
  Eigen::SparseMatrix<double> bordered_;  // UMFPACK keeps a view of it
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::SPQR<Eigen::SparseMatrix<double>> qr_;
  Eigen::SparseMatrix<double> r_;
};

inline std::pair<FlowField, SolveReport> solve_stokes(const SaddleSystem& sys, const Eigen::VectorXd& b,
                                                      const SolveOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  auto out = StokesFactorization(sys, opt).solve(b);
  out.second.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Removes the gauge components (pressure mean, and on periodic lattices the
/// velocity means and any checkerboard null modes). Idempotent.
inline FlowField apply_gauges(const SaddleSystem& sys, const FlowField& f) {
  Eigen::VectorXd x = sys.pack(f);
  for (const auto& g : sys.gauges()) x -= g.unknowns.dot(x) * g.unknowns;
  return sys.unpack(x);
}

/// Removes the incompatible components of a right-hand side.
inline Eigen::VectorXd apply_gauges_rhs(const SaddleSystem& sys, const Eigen::VectorXd& b) {
  Eigen::VectorXd out = b;
  for (const auto& g : sys.gauges()) out -= g.equations.dot(out) * g.equations;
  return out;
}

struct InfSupEstimate {
  double h = 0.0;
  double mu = 0.0;
  Eigen::Index kernel_dim = 0;  // dim ker D on the velocity side, per component
  Eigen::Index pressure_dim = 0;
  std::string method;
};

inline constexpr Eigen::Index kInfSupMaxUnknowns = 4096;

/// mu^2 = min over P (orthogonal to the pressure gauges) of
///   sup_U <B_d U, P>^2 / ||D U||^2  /  ||P||^2,
/// with D the scalar gradient applied to each velocity component. The sup is
/// P^T S P with S = B_d G^+ B_d^T, G = blockdiag(D^T D, D^T D); ker D is
/// removed by the pseudo-inverse (relative tolerance 1e-12).
inline InfSupEstimate estimate_infsup(const SparseMatrix& grad, const SparseMatrix& div,
                                      const std::vector<Eigen::VectorXd>& pressure_gauges, double h = 0.0) {
  const Eigen::Index N = grad.cols();
  if (div.cols() != 2 * N || div.rows() * 2 != grad.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "gradient and divergence do not match");
  }
  if (3 * N > kInfSupMaxUnknowns) {
    throw Error(ErrorKind::TooLarge, std::to_string(3 * N) + " unknowns exceed the dense inf-sup cap of " +
                                         std::to_string(kInfSupMaxUnknowns));
  }
  const Eigen::MatrixXd d = Eigen::MatrixXd(grad);
  const Eigen::MatrixXd gram = d.transpose() * d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cut = 1e-12 * ev.maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  InfSupEstimate out;
  out.h = h;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut) {
      inv[i] = 1.0 / ev[i];
    } else {
      ++out.kernel_dim;
    }
  }
  // B_d G^+ B_d^T = sum over components of Bc V diag(inv) V^T Bc^T.
  const Eigen::MatrixXd& V = es.eigenvectors();
  const Eigen::MatrixXd bd = Eigen::MatrixXd(div);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(div.rows(), div.rows());
  for (int c = 0; c < 2; ++c) {
    const Eigen::MatrixXd w = bd.middleCols(c * N, N) * V * inv.cwiseSqrt().asDiagonal();
    s.noalias() += w * w.transpose();
  }

  // Orthonormal basis of the complement of the pressure gauges.
  const Eigen::Index M = div.rows();
  Eigen::MatrixXd z(M, static_cast<Eigen::Index>(pressure_gauges.size()));
  for (std::size_t i = 0; i < pressure_gauges.size(); ++i) z.col(static_cast<Eigen::Index>(i)) = pressure_gauges[i];
  Eigen::MatrixXd q;
  if (z.cols() > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    q = (qr.householderQ() * Eigen::MatrixXd::Identity(M, M)).rightCols(M - z.cols());
  } else {
    q = Eigen::MatrixXd::Identity(M, M);
  }
  const Eigen::MatrixXd reduced = q.transpose() * s * q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(reduced, Eigen::EigenvaluesOnly);
  out.mu = std::sqrt(std::max(0.0, rs.eigenvalues().minCoeff()));
  out.pressure_dim = q.cols();
  out.method = "dense-eig-pinv";
  return out;
}

inline InfSupEstimate estimate_infsup(const SaddleSystem& sys) {
  const Eigen::Index N = sys.num_nodes();
  if (sys.num_nodes() != sys.num_virtual()) {
    throw Error(ErrorKind::DimensionMismatch, "inf-sup estimate needs co-located pressure and virtual points");
  }
  SparseMatrix grad = sys.config().gradient == GradientMode::Staggered
                          ? sys.pressure_block()
                          : assemble_gradient_staggered(sys.shape(), sys.stencil());
  std::vector<Eigen::VectorXd> pg;
  for (const auto& g : sys.gauges()) {
    if (g.name.rfind("p_", 0) == 0) pg.push_back(g.unknowns.tail(N));
  }
  return estimate_infsup(grad, sys.divergence(), pg, sys.grid().spacing());
}

}  // namespace vip

#endif
