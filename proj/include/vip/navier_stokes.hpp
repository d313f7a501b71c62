#ifndef VIP_NAVIER_STOKES_HPP
#define VIP_NAVIER_STOKES_HPP

#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vip/solver.hpp"

namespace vip {

struct PicardConfig {
  double re = 100.0;
  double tol = 1e-8;
  int max_iter = 100;
  double relaxation = 1.0;
  double fallback_relaxation = 0.7;
  int krylov_limit = 40;  // refactor the preconditioner beyond this many inner iterations

  void validate() const {
    if (!(re > 0.0)) throw Error(ErrorKind::Config, "Re must be positive");
    if (!(tol > 0.0)) throw Error(ErrorKind::Config, "tolerance must be positive");
    if (max_iter < 1) throw Error(ErrorKind::Config, "max_iter must be at least 1");
    if (!(relaxation > 0.0 && relaxation <= 1.0) || !(fallback_relaxation > 0.0 && fallback_relaxation <= 1.0)) {
      throw Error(ErrorKind::Config, "relaxation must lie in (0, 1]");
    }
  }
};

struct KovasznayParams {
  double re = 40.0;
  double lambda = 0.0;

  static KovasznayParams from_re(double re) {
    return {re, 0.5 * re - std::sqrt(0.25 * re * re + 4.0 * M_PI * M_PI)};
  }
};

struct FlowSample {
  double u, v, p;
};

inline FlowSample kovasznay_field(const KovasznayParams& k, double x, double y) {
  const double e = std::exp(k.lambda * x);
  const double c = std::cos(2.0 * M_PI * y), s = std::sin(2.0 * M_PI * y);
  return {1.0 - e * c, k.lambda / (2.0 * M_PI) * e * s, 0.5 * (1.0 - e * e)};
}

/// u . grad u of the Kovasznay field, in closed form.
inline Point kovasznay_convection(const KovasznayParams& k, double x, double y) {
  const double l = k.lambda, tp = 2.0 * M_PI;
  const double e = std::exp(l * x), c = std::cos(tp * y), s = std::sin(tp * y);
  const double u = 1.0 - e * c, v = l / tp * e * s;
  const double ux = -l * e * c, uy = tp * e * s;
  const double vx = l * l / tp * e * s, vy = l * e * c;
  return Point(u * ux + v * uy, u * vx + v * vy);
}

/// Oseen convection (Gamma u^k . grad) at fixed evaluation points. The shape
/// table is built once; each call only rescales the derivative rows.
class ConvectionAssembler {
 public:
  ConvectionAssembler() = default;

  template <class Window>
  ConvectionAssembler(const ShapeFunctions<Window>& shape, std::vector<Point> points)
      : n_(static_cast<Eigen::Index>(shape.nodes().size())),
        m_(static_cast<Eigen::Index>(points.size())),
        table_(build_shape_table(shape, std::move(points), kFirst)) {
    interp_ = table_operator(table_, n_, {{kColValue, 1.0}});
  }

  Eigen::Index rows() const { return 2 * m_; }

  SparseMatrix operator()(const FlowField& current) const {
    if (current.size() != n_) throw Error(ErrorKind::DimensionMismatch, "current field has the wrong size");
    if (!current.U.allFinite()) throw Error(ErrorKind::Config, "current field is not finite");
    const Eigen::VectorXd a = interp_ * current.u();
    const Eigen::VectorXd b = interp_ * current.v();
    Triplets trip;
    for (Eigen::Index J = 0; J < m_; ++J) {
      if (a[J] == 0.0 && b[J] == 0.0) continue;
      const ShapeRow& r = table_.rows[static_cast<std::size_t>(J)];
      for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double w = a[J] * r.values(kk, kColDx) + b[J] * r.values(kk, kColDy);
        trip.emplace_back(J, r.nodes[k], w);
        trip.emplace_back(m_ + J, n_ + r.nodes[k], w);
      }
    }
    return detail::finish(2 * m_, 2 * n_, trip);
  }

 private:
  Eigen::Index n_ = 0, m_ = 0;
  ShapeTable table_;
  SparseMatrix interp_;
};

template <class Window>
SparseMatrix assemble_convection(const ShapeFunctions<Window>& shape, const std::vector<Point>& eval_points,
                                 const FlowField& current) {
  return ConvectionAssembler(shape, eval_points)(current);
}

struct PicardStep {
  int iteration = 0;
  double update = 0.0;    // ||x^{k+1} - x^k|| / ||x^{k+1}||, velocity and pressure
  double residual = 0.0;  // compatible nonlinear residual of the iterate entering this step
  double relaxation = 1.0;
  int krylov_iterations = 0;
  bool refactored = false;
  double continuity = 0.0;
};

struct PicardResult {
  FlowField field;
  std::vector<PicardStep> trace;
  bool converged = false;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, PicardResult last)
      : Error(ErrorKind::NoConvergence, what), last_(std::move(last)) {}
  const PicardResult& last() const { return last_; }

 private:
  PicardResult last_;
};

namespace detail {

/// Wraps a fixed factorization so that Eigen's GMRES can use it as a
/// preconditioner; compute() is a no-op.
struct FactorPreconditioner {
  const StokesFactorization* f = nullptr;

  template <class M> FactorPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M> FactorPreconditioner& factorize(const M&) { return *this; }
  template <class M> FactorPreconditioner& compute(const M&) { return *this; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return f->solve_bordered(b); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }
};

}  // namespace detail

/// Steady Navier-Stokes -(1/Re) Lap u + (u . grad) u + grad p = f, div u = 0
/// with Dirichlet data g, by Picard iteration from the Stokes solution.
inline PicardResult picard_solve(SaddleSystem& sys, const VectorField& f, const VectorField& g,
                                 const PicardConfig& cfg) {
  cfg.validate();
  sys.set_viscosity(1.0 / cfg.re);
  const Eigen::VectorXd b = sys.rhs(f, g);

  std::vector<Point> bpts;
  for (int i : sys.boundary_nodes()) bpts.push_back(sys.nodes()[i]);
  const ConvectionAssembler conv_t(sys.shape(), sys.grid().points());
  const ConvectionAssembler conv_b(sys.shape(), bpts);

  sys.set_convection(SparseMatrix(conv_t.rows(), 2 * sys.num_nodes()), SparseMatrix(conv_b.rows(), 2 * sys.num_nodes()));
  auto factor = std::make_unique<StokesFactorization>(sys);
  if (!factor->bordered()) throw Error(ErrorKind::DimensionMismatch, "Picard iteration needs a square system");
  PicardResult res;
  res.field = factor->solve(b).first;

  const auto& gauges = sys.gauges();
  const Eigen::Index n = sys.num_unknowns(), g_count = static_cast<Eigen::Index>(gauges.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + g_count);
  rhs.head(b.size()) = b;
  const double bn = std::max(b.norm(), std::numeric_limits<double>::min());

  auto compatible_residual = [&](const SparseMatrix& k, const Eigen::VectorXd& x) {
    Eigen::VectorXd r = k * x - b;
    for (const auto& gg : gauges) r -= gg.equations.dot(r) * gg.equations;
    return r.norm() / bn;
  };

  double omega = cfg.relaxation;
  double prev_residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x = sys.pack(res.field);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    sys.set_convection(conv_t(res.field), conv_b(res.field));
    const SparseMatrix k = sys.matrix();
    PicardStep step;
    step.iteration = it;

    const double residual = compatible_residual(k, x);
    if (it > 1 && residual > prev_residual && omega > cfg.fallback_relaxation) omega = cfg.fallback_relaxation;
    prev_residual = residual;

    const Eigen::SparseMatrix<double> a = detail::bordered(k, gauges);
    Eigen::GMRES<Eigen::SparseMatrix<double>, detail::FactorPreconditioner> gmres;
    gmres.set_restart(cfg.krylov_limit);
    gmres.setMaxIterations(cfg.krylov_limit);
    gmres.setTolerance(1e-13);
    gmres.preconditioner().f = factor.get();
    gmres.compute(a);
    Eigen::VectorXd guess(n + g_count);
    guess << x, Eigen::VectorXd::Zero(g_count);
    Eigen::VectorXd z = gmres.solveWithGuess(rhs, guess);
    step.krylov_iterations = static_cast<int>(gmres.iterations());
    if (gmres.info() != Eigen::Success || !z.allFinite()) {
      factor = std::make_unique<StokesFactorization>(sys);
      z = factor->solve_bordered(rhs);
      step.refactored = true;
    }

    const Eigen::VectorXd x_new = x + omega * (z.head(n) - x);
    step.update = (x_new - x).norm() / std::max(x_new.norm(), std::numeric_limits<double>::min());
    step.relaxation = omega;
    x = x_new;
    res.field = sys.unpack(x);
    step.continuity = (sys.divergence() * res.field.U).norm();
    step.residual = residual;
    res.trace.push_back(step);
    if (step.update <= cfg.tol) {
      res.converged = true;
      return res;
    }
  }
  throw NoConvergence("Picard iteration did not reach " + std::to_string(cfg.tol) + " in " +
                          std::to_string(cfg.max_iter) + " iterations",
                      std::move(res));
}

/// Ghia et al. centerline reference: u(y) on x = 1/2 and v(x) on y = 1/2.
struct GhiaReference {
  std::vector<double> y, u;
  std::vector<double> x, v;
};

inline GhiaReference read_ghia_csv(std::istream& is) {
  GhiaReference ref;
  std::vector<double>*a = nullptr, *b = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line == "y,u") {
      a = &ref.y, b = &ref.u;
      continue;
    }
    if (line == "x,v") {
      a = &ref.x, b = &ref.v;
      continue;
    }
    if (!a) throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": data before a y,u or x,v header");
    std::istringstream ls(line);
    double p, q;
    char comma;
    if (!(ls >> p >> comma >> q) || comma != ',') {
      throw Error(ErrorKind::Io, "line " + std::to_string(lineno) + ": expected two comma-separated numbers");
    }
    a->push_back(p);
    b->push_back(q);
  }
  if (ref.y.empty()) throw Error(ErrorKind::Io, "no y,u block");
  return ref;
}

inline GhiaReference load_ghia_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_ghia_csv(is);
}

/// Lid velocity on the top edge of [0,1]^2, zero elsewhere. The corners are
/// not nodes, so the raw discontinuity is never sampled; the regularized
/// profile 16 x^2 (1 - x)^2 removes it altogether.
inline Point cavity_lid(const Point& x, bool regularized = false) {
  if (std::abs(x[1] - 1.0) > 1e-12) return Point::Zero();
  return Point(regularized ? 16.0 * x[0] * x[0] * (1.0 - x[0]) * (1.0 - x[0]) : 1.0, 0.0);
}

}  // namespace vip

#endif
