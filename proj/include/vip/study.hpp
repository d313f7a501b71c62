#ifndef VIP_STUDY_HPP
#define VIP_STUDY_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vip/config.hpp"
#include "vip/csv.hpp"
#include "vip/navier_stokes.hpp"
#include "vip/postprocess.hpp"
#include "vip/solver.hpp"

namespace vip {

// ---------------------------------------------------------------------------
// Discrete norms

/// (h^2 sum v_i^2)^{1/2}, accumulated in storage order.
inline double scaled_norm(double h, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i] * v[i];
  return h * std::sqrt(s);
}

/// Same norm with the squares summed in increasing order.
inline double scaled_norm_sorted(double h, const Eigen::VectorXd& v) {
  std::vector<double> sq(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) sq[static_cast<std::size_t>(i)] = v[i] * v[i];
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double x : sq) s += x;
  return h * std::sqrt(s);
}

inline constexpr double kOrderFloor = 1e-13;

inline std::optional<double> observed_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (!(e_coarse > kOrderFloor && e_fine > kOrderFloor)) return std::nullopt;
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

// ---------------------------------------------------------------------------
// Manufactured problems

struct Manufactured {
  std::string name;
  VectorField velocity;
  ScalarField pressure;
  VectorField forcing;  // for viscosity 1 and no convection
};

/// Stream function psi = sin 2 pi x sin 2 pi y (u = psi_y, v = -psi_x),
/// pressure cos 2 pi x.
inline Manufactured taylor_green() {
  constexpr double tp = 2.0 * M_PI;
  Manufactured m;
  m.name = "taylor-green";
  m.velocity = [](const Point& x) -> Point {
    return Point(tp * std::sin(tp * x[0]) * std::cos(tp * x[1]), -tp * std::cos(tp * x[0]) * std::sin(tp * x[1]));
  };
  m.pressure = [](const Point& x) { return std::cos(tp * x[0]); };
  m.forcing = [](const Point& x) -> Point {
    const double s = 2.0 * tp * tp * tp;
    return Point(s * std::sin(tp * x[0]) * std::cos(tp * x[1]) - tp * std::sin(tp * x[0]),
                 -s * std::cos(tp * x[0]) * std::sin(tp * x[1]));
  };
  return m;
}

/// v = (x^2, -2xy), q = x + y: reproduced exactly by quadratic shape functions.
inline Manufactured quadratic_flow() {
  Manufactured m;
  m.name = "polynomial";
  m.velocity = [](const Point& x) -> Point { return Point(x[0] * x[0], -2.0 * x[0] * x[1]); };
  m.pressure = [](const Point& x) { return x[0] + x[1]; };
  m.forcing = [](const Point&) -> Point { return Point(-1.0, 1.0); };
  return m;
}

inline Manufactured manufactured(const std::string& name) {
  if (name == "taylor-green") return taylor_green();
  if (name == "polynomial") return quadratic_flow();
  throw Error(ErrorKind::Config, "unknown manufactured solution '" + name + "'");
}

// ---------------------------------------------------------------------------
// One discretized problem: the node set owns storage the system points into.

struct Discretization {
  std::unique_ptr<NodeSet> nodes;
  std::unique_ptr<SaddleSystem> system;
  double h = 0.0;
};

inline Discretization discretize(const RunConfig& cfg, const Domain& domain, double h) {
  Discretization d;
  d.h = h;
  NodeSet regular = generate_regular(domain, h);
  d.nodes = std::make_unique<NodeSet>(cfg.perturbation > 0.0 ? perturb_nodes(regular, cfg.perturbation, cfg.seed)
                                                             : std::move(regular));
  d.system = std::make_unique<SaddleSystem>(*d.nodes, h, cfg.assembly());
  return d;
}

inline FlowField sample_flow(const NodeSet& nodes, const VectorField& v, const ScalarField& q) {
  const auto N = static_cast<Eigen::Index>(nodes.size());
  FlowField f = FlowField::zero(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Point p = v(nodes[i]);
    f.U[i] = p[0];
    f.U[N + i] = p[1];
    if (q) f.P[i] = q(nodes[i]);
  }
  return f;
}

/// Removes the pressure gauge components (constant and, where null,
/// checkerboards) from a pressure coefficient vector.
inline Eigen::VectorXd gauge_pressure(const SaddleSystem& sys, Eigen::VectorXd p) {
  const Eigen::Index N = sys.num_nodes();
  for (const auto& g : sys.gauges()) {
    if (g.name.rfind("p_", 0) != 0) continue;
    const Eigen::VectorXd m = g.unknowns.tail(N);
    p -= m.dot(p) * m;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Convergence study

struct ErrorRecord {
  double h = 0.0;
  double e_du = 0.0;  // h ||D(U - v)||
  double e_p = 0.0;   // h ||P - q||, gauged
  double e_u = 0.0;   // ||U - v|| / ||v||
  std::optional<double> order_du, order_p;
};

inline ErrorRecord manufactured_errors(const SaddleSystem& sys, const FlowField& field, const Manufactured& m,
                                       double h) {
  const FlowField truth = sample_flow(sys.nodes(), m.velocity, m.pressure);
  const SparseMatrix d = sys.config().gradient == GradientMode::Staggered
                             ? sys.pressure_block()
                             : assemble_gradient_staggered(sys.shape(), sys.stencil());
  const Eigen::Index N = sys.num_nodes();
  const Eigen::VectorXd du = field.U - truth.U;
  Eigen::VectorXd grad(2 * d.rows());
  grad << d * du.head(N), d * du.tail(N);
  ErrorRecord r;
  r.h = h;
  r.e_du = scaled_norm(h, grad);
  r.e_p = scaled_norm(h, gauge_pressure(sys, field.P - truth.P));
  const double vn = truth.U.norm();
  r.e_u = vn > 0.0 ? du.norm() / vn : du.norm();
  return r;
}

struct StudyResult {
  std::vector<ErrorRecord> records;
  bool complete = true;
  std::string failure;
  ErrorKind failure_kind = ErrorKind::SingularSystem;
  std::optional<FlowField> finest;  // solution at the last completed h
  std::vector<Point> finest_nodes;
  std::optional<SolveReport> finest_report;
};

inline Domain manufactured_domain(const RunConfig& cfg) {
  return Domain::unit_square(cfg.boundary == "periodic");
}

inline StudyResult run_convergence_study(const RunConfig& cfg) {
  const Manufactured m = manufactured(cfg.solution);
  const Domain domain = manufactured_domain(cfg);
  StudyResult out;
  for (double h : cfg.h) {
    try {
      Discretization d = discretize(cfg, domain, h);
      const SaddleSystem& sys = *d.system;
      const Eigen::VectorXd b = domain.fully_periodic() ? sys.rhs(sys.sample_forcing(m.forcing))
                                                        : sys.rhs(m.forcing, m.velocity);
      SolveOptions opt;
      opt.tolerance = cfg.tolerance;
      const auto [field, rep] = solve_stokes(sys, b, opt);
      ErrorRecord r = manufactured_errors(sys, field, m, h);
      if (!out.records.empty()) {
        const ErrorRecord& prev = out.records.back();
        r.order_du = observed_order(prev.e_du, r.e_du, prev.h, h);
        r.order_p = observed_order(prev.e_p, r.e_p, prev.h, h);
      }
      out.records.push_back(r);
      out.finest = field;
      out.finest_report = rep;
      out.finest_nodes.assign(d.nodes->positions().begin(), d.nodes->positions().end());
    } catch (const Error& e) {
      out.complete = false;
      out.failure = "h=" + format_double(h) + ": " + e.what();
      out.failure_kind = e.kind();
      break;
    }
  }
  return out;
}

inline CsvTable errors_table(const std::vector<ErrorRecord>& records) {
  CsvTable t;
  const bool orders = records.size() > 1;
  t.header = {"h", "e_DU", "e_P", "e_U"};
  if (orders) t.header.insert(t.header.end(), {"order_DU", "order_P"});
  for (const auto& r : records) {
    std::vector<std::optional<double>> row{r.h, r.e_du, r.e_p, r.e_u};
    if (orders) row.insert(row.end(), {r.order_du, r.order_p});
    t.add(std::move(row));
  }
  return t;
}

inline CsvTable solution_table(const std::vector<Point>& nodes, const FlowField& f) {
  CsvTable t;
  t.header = {"x", "y", "u", "v", "p"};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto I = static_cast<Eigen::Index>(i);
    t.add({nodes[i][0], nodes[i][1], f.u()[I], f.v()[I], f.P[I]});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Inf-sup study

struct InfSupRecord {
  double h = 0.0;
  double mu = 0.0;
  Eigen::Index kernel_dim = 0;
};

inline std::vector<InfSupRecord> run_infsup_study(const RunConfig& cfg) {
  std::vector<InfSupRecord> out;
  for (double h : cfg.h) {
    const Discretization d = discretize(cfg, manufactured_domain(cfg), h);
    const auto est = estimate_infsup(*d.system);
    out.push_back({h, est.mu, est.kernel_dim});
  }
  return out;
}

inline CsvTable infsup_table(const std::vector<InfSupRecord>& records) {
  CsvTable t;
  t.header = {"h", "mu"};
  for (const auto& r : records) t.add({r.h, r.mu});
  return t;
}

// ---------------------------------------------------------------------------
// Kovasznay

inline Domain kovasznay_domain() { return Domain(Point(-0.5, 0.0), Point(1.5, 2.0), {false, false}); }

struct KovasznayRecord {
  double h = 0.0;
  double e_u = 0.0;  // relative l2 of the nodal velocity error
  double e_p = 0.0;  // relative l2 of the gauged nodal pressure error
  int iterations = 0;
  std::optional<double> order_u;
  std::vector<PicardStep> trace;
};

struct KovasznayResult {
  std::vector<KovasznayRecord> records;
  bool complete = true;
  std::string failure;
  ErrorKind failure_kind = ErrorKind::NoConvergence;
};

inline KovasznayResult run_kovasznay_study(const RunConfig& cfg) {
  const auto k = KovasznayParams::from_re(cfg.re);
  const VectorField exact = [k](const Point& x) -> Point {
    const auto s = kovasznay_field(k, x[0], x[1]);
    return Point(s.u, s.v);
  };
  const ScalarField pressure = [k](const Point& x) { return kovasznay_field(k, x[0], x[1]).p; };
  KovasznayResult out;
  for (double h : cfg.h) {
    try {
      Discretization d = discretize(cfg, kovasznay_domain(), h);
      PicardConfig pc = cfg.picard;
      pc.re = cfg.re;
      const auto res = picard_solve(*d.system, [](const Point&) -> Point { return Point::Zero(); }, exact, pc);
      const FlowField truth = sample_flow(*d.nodes, exact, pressure);
      KovasznayRecord r;
      r.h = h;
      r.e_u = (res.field.U - truth.U).norm() / truth.U.norm();
      const Eigen::VectorXd tp = gauge_pressure(*d.system, truth.P);
      r.e_p = gauge_pressure(*d.system, res.field.P - truth.P).norm() / tp.norm();
      r.iterations = static_cast<int>(res.trace.size());
      r.trace = res.trace;
      if (!out.records.empty()) r.order_u = observed_order(out.records.back().e_u, r.e_u, out.records.back().h, h);
      out.records.push_back(std::move(r));
    } catch (const Error& e) {
      out.complete = false;
      out.failure = "h=" + format_double(h) + ": " + e.what();
      out.failure_kind = e.kind();
      break;
    }
  }
  return out;
}

inline CsvTable kovasznay_table(const std::vector<KovasznayRecord>& records) {
  CsvTable t;
  t.header = {"h", "e_U", "e_P", "iterations", "order_U"};
  for (const auto& r : records) t.add({r.h, r.e_u, r.e_p, static_cast<double>(r.iterations), r.order_u});
  return t;
}

inline CsvTable trace_table(const std::vector<std::pair<double, std::vector<PicardStep>>>& traces) {
  CsvTable t;
  t.header = {"h", "iteration", "update", "residual", "relaxation", "continuity", "krylov", "refactored"};
  for (const auto& [h, trace] : traces) {
    for (const auto& s : trace) {
      t.add({h, static_cast<double>(s.iteration), s.update, s.residual, s.relaxation, s.continuity,
             static_cast<double>(s.krylov_iterations), s.refactored ? 1.0 : 0.0});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Lid-driven cavity

struct CavityResult {
  double h = 0.0;
  double re = 0.0;
  std::vector<Point> nodes;
  FlowField field;
  Eigen::VectorXd psi, omega;  // node coefficients of psi; omega sampled at the nodes
  std::vector<PicardStep> trace;
  std::vector<CenterlineSample> u_line, v_line;
  std::optional<GhiaReference> reference;
  std::vector<double> u_at_ref, v_at_ref;  // Gamma u, Gamma v at the reference coordinates
  double max_dev_u = std::numeric_limits<double>::quiet_NaN();
  double max_dev_v = std::numeric_limits<double>::quiet_NaN();
  int primary_vortices = 0;
  Point vortex_center = Point::Zero();
};

/// Counts strict local minima of psi over the interior lattice that reach at
/// least half the global minimum (the clockwise primary vortex has psi < 0).
inline int count_primary_vortices(const NodeSet& nodes, const Eigen::VectorXd& psi, Point* center) {
  const auto& lat = nodes.lattice();
  if (!lat) throw Error(ErrorKind::Config, "vortex count needs a lattice node set");
  const int nx = lat->counts[0], ny = lat->counts[1];
  std::vector<double> grid(static_cast<std::size_t>(nx) * ny, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    grid[static_cast<std::size_t>(lat->index[i][1]) * nx + lat->index[i][0]] = psi[static_cast<Eigen::Index>(i)];
  }
  const double lo = psi.minCoeff();
  int count = 0;
  for (int j = 1; j + 1 < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      const double c = grid[static_cast<std::size_t>(j) * nx + i];
      if (!(c <= 0.5 * lo)) continue;
      bool is_min = true;
      for (int dj = -1; dj <= 1 && is_min; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj) continue;
          const double n = grid[static_cast<std::size_t>(j + dj) * nx + i + di];
          if (!std::isnan(n) && n <= c) {
            is_min = false;
            break;
          }
        }
      }
      if (is_min) {
        ++count;
        if (center) *center = Point(nodes.domain().lo()[0] + i * lat->spacing, nodes.domain().lo()[1] + j * lat->spacing);
      }
    }
  }
  return count;
}

inline CavityResult run_cavity(const RunConfig& cfg, double h) {
  Discretization d = discretize(cfg, Domain::unit_square(false), h);
  PicardConfig pc = cfg.picard;
  pc.re = cfg.re;
  const bool reg = cfg.regularize;
  const auto res = picard_solve(*d.system, [](const Point&) -> Point { return Point::Zero(); },
                                [reg](const Point& x) { return cavity_lid(x, reg); }, pc);
  CavityResult out;
  out.h = h;
  out.re = cfg.re;
  out.nodes.assign(d.nodes->positions().begin(), d.nodes->positions().end());
  out.field = res.field;
  out.trace = res.trace;
  const auto& shape = d.system->shape();
  out.psi = compute_streamfunction(shape, *d.nodes, h, res.field);
  out.omega = compute_vorticity(shape, res.field, out.nodes);
  out.u_line = extract_centerline(shape, res.field, Centerline::Vertical, 0.5, cfg.samples);
  out.v_line = extract_centerline(shape, res.field, Centerline::Horizontal, 0.5, cfg.samples);
  out.primary_vortices = count_primary_vortices(*d.nodes, out.psi, &out.vortex_center);
  if (!cfg.reference.empty()) {
    out.reference = load_ghia_csv(cfg.reference);
    std::vector<Point> pu, pv;
    for (double y : out.reference->y) pu.emplace_back(0.5, y);
    for (double x : out.reference->x) pv.emplace_back(x, 0.5);
    const Eigen::VectorXd gu = evaluate_field(shape, Eigen::VectorXd(res.field.u()), pu);
    const Eigen::VectorXd gv = evaluate_field(shape, Eigen::VectorXd(res.field.v()), pv);
    out.u_at_ref.assign(gu.data(), gu.data() + gu.size());
    out.v_at_ref.assign(gv.data(), gv.data() + gv.size());
    out.max_dev_u = 0.0;
    for (std::size_t i = 0; i < pu.size(); ++i) out.max_dev_u = std::max(out.max_dev_u, std::abs(gu[i] - out.reference->u[i]));
    out.max_dev_v = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) out.max_dev_v = std::max(out.max_dev_v, std::abs(gv[i] - out.reference->v[i]));
  }
  return out;
}

inline CsvTable centerline_table(const std::vector<CenterlineSample>& line, const char* coord, const char* value) {
  CsvTable t;
  t.header = {coord, value};
  for (const auto& s : line) t.add({s.coord, s.value});
  return t;
}

inline CsvTable comparison_table(const std::vector<double>& coord, const std::vector<double>& got,
                                 const std::vector<double>& ref, const char* c, const char* v) {
  CsvTable t;
  t.header = {c, v, std::string(v) + "_ref", "deviation"};
  for (std::size_t i = 0; i < coord.size(); ++i) t.add({coord[i], got[i], ref[i], got[i] - ref[i]});
  return t;
}

inline CsvTable cavity_field_table(const CavityResult& r) {
  CsvTable t;
  t.header = {"x", "y", "u", "v", "p", "psi", "omega"};
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const auto I = static_cast<Eigen::Index>(i);
    t.add({r.nodes[i][0], r.nodes[i][1], r.field.u()[I], r.field.v()[I], r.field.P[I], r.psi[I], r.omega[I]});
  }
  return t;
}

}  // namespace vip

#endif
