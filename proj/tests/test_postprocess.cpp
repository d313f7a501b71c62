#include <gtest/gtest.h>

#include <random>

#include "vip/navier_stokes.hpp"
#include "vip/postprocess.hpp"

using namespace vip;

namespace {

FlowField sample_field(const NodeSet& nodes, const VectorField& v) {
  const auto N = static_cast<Eigen::Index>(nodes.size());
  FlowField f = FlowField::zero(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Point p = v(nodes[i]);
    f.U[i] = p[0];
    f.U[N + i] = p[1];
  }
  return f;
}

std::vector<Point> interior_points(const Domain& d, int n, std::uint64_t seed, double margin) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(d.lo()[0] + margin, d.hi()[0] - margin);
  std::uniform_real_distribution<double> uy(d.lo()[1] + margin, d.hi()[1] - margin);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = Point(ux(rng), uy(rng));
  return pts;
}

}  // namespace

TEST(Vorticity, RigidRotationAndConstant) {
  const NodeSet nodes = generate_regular(Domain::unit_square(false), 1.0 / 8);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 / 8);
  const auto pts = interior_points(nodes.domain(), 50, 1, 0.1);
  const Eigen::VectorXd w = compute_vorticity(shape, sample_field(nodes, [](const Point& x) { return Point(-x[1], x[0]); }), pts);
  EXPECT_LT((w.array() - 2.0).abs().maxCoeff(), 1e-8);
  const Eigen::VectorXd z = compute_vorticity(shape, sample_field(nodes, [](const Point&) { return Point(3.0, -1.0); }), pts);
  EXPECT_LT(z.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Vorticity, KovasznayClosedForm) {
  const auto k = KovasznayParams::from_re(40.0);
  const Domain d(Point(-0.5, 0.0), Point(1.5, 2.0), {false, false});
  const auto truth = [&](const Point& x) {
    const auto s = kovasznay_field(k, x[0], x[1]);
    return Point(s.u, s.v);
  };
  // omega = v_x - u_y = (lambda^2 / 2 pi - 2 pi) e^{lambda x} sin 2 pi y
  const auto omega = [&](const Point& x) {
    return (k.lambda * k.lambda / (2 * M_PI) - 2 * M_PI) * std::exp(k.lambda * x[0]) * std::sin(2 * M_PI * x[1]);
  };
  const auto pts = interior_points(d, 100, 3, 0.1);
  double prev = 0.0;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const NodeSet nodes = generate_regular(d, h);
    const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 * h);
    const Eigen::VectorXd w = compute_vorticity(shape, sample_field(nodes, truth), pts);
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs(w[i] - omega(pts[i])));
    if (prev > 0.0) {
      EXPECT_LT(err, 0.5 * prev) << "h=" << h;
    }
    prev = err;
  }
}

TEST(StreamFunction, ZeroVorticity) {
  const NodeSet nodes = generate_regular(Domain::unit_square(false), 1.0 / 8);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 / 8);
  const Eigen::VectorXd psi = compute_streamfunction(shape, nodes, 1.0 / 8, FlowField::zero(nodes.size()));
  EXPECT_EQ(psi.cwiseAbs().maxCoeff(), 0.0);
}

TEST(StreamFunction, PeriodicManufactured) {
  // omega = -Lap psi for psi = -sin 2 pi x sin 2 pi y is -8 pi^2 sin sin.
  double prev = 0.0;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const NodeSet nodes = generate_regular(Domain::unit_square(true), h);
    const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 * h);
    const VirtualGrid grid(nodes.domain(), h);
    Eigen::VectorXd omega(grid.size());
    for (std::size_t J = 0; J < grid.size(); ++J) {
      const Point y = grid.point(J);
      omega[J] = -8 * M_PI * M_PI * std::sin(2 * M_PI * y[0]) * std::sin(2 * M_PI * y[1]);
    }
    const Eigen::VectorXd psi = solve_streamfunction(shape, nodes, grid, omega);
    double err = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      err = std::max(err, std::abs(psi[i] + std::sin(2 * M_PI * nodes[i][0]) * std::sin(2 * M_PI * nodes[i][1])));
    }
    EXPECT_LT(err, 4.0 * h) << "h=" << h;
    if (prev > 0.0) {
      EXPECT_LT(err, prev) << "h=" << h;
    }
    prev = err;
    EXPECT_NEAR(psi.mean(), 0.0, 1e-12);
    const Eigen::VectorXd again = solve_streamfunction(shape, nodes, grid, omega);
    EXPECT_LT((again - psi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(StreamFunction, EnclosedCellFlowVanishesOnBoundary) {
  // A cell flow u = psi_y, v = -psi_x with psi = x^2 (1-x)^2 y^2 (1-y)^2 is
  // tangential on the walls; recovering psi tests the Dirichlet path.
  const auto psi_exact = [](const Point& x) {
    return x[0] * x[0] * (1 - x[0]) * (1 - x[0]) * x[1] * x[1] * (1 - x[1]) * (1 - x[1]);
  };
  const auto vel = [](const Point& x) {
    const double a = x[0] * x[0] * (1 - x[0]) * (1 - x[0]), b = x[1] * x[1] * (1 - x[1]) * (1 - x[1]);
    const double da = 2 * x[0] * (1 - x[0]) * (1 - 2 * x[0]), db = 2 * x[1] * (1 - x[1]) * (1 - 2 * x[1]);
    return Point(a * db, -da * b);
  };
  double prev = 0.0;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const NodeSet nodes = generate_regular(Domain::unit_square(false), h);
    const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 * h);
    const Eigen::VectorXd psi = compute_streamfunction(shape, nodes, h, sample_field(nodes, vel));
    double err = 0.0;
    std::vector<Point> wall;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      err = std::max(err, std::abs(psi[i] - psi_exact(nodes[i])));
      if (nodes.role(i) == NodeRole::Boundary) wall.push_back(nodes[i]);
    }
    EXPECT_LT(evaluate_field(shape, psi, wall).cwiseAbs().maxCoeff(), 1e-12);
    if (prev > 0.0) {
      EXPECT_LT(err, prev);
    }
    prev = err;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Centerline, ConstantFieldAndEndpoints) {
  const NodeSet nodes = generate_regular(Domain::unit_square(false), 1.0 / 8);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 / 8);
  const FlowField f = sample_field(nodes, [](const Point&) { return Point(0.25, -0.5); });
  const auto vert = extract_centerline(shape, f, Centerline::Vertical, 0.5, 129);
  ASSERT_EQ(vert.size(), 129u);
  for (const auto& s : vert) EXPECT_NEAR(s.value, 0.25, 1e-10);
  EXPECT_DOUBLE_EQ(vert[64].coord, 0.5);
  const auto hor = extract_centerline(shape, f, Centerline::Horizontal, 0.5, 2);
  ASSERT_EQ(hor.size(), 2u);
  EXPECT_DOUBLE_EQ(hor[0].coord, 0.0);
  EXPECT_DOUBLE_EQ(hor[1].coord, 1.0);
  EXPECT_NEAR(hor[0].value, -0.5, 1e-10);
  EXPECT_THROW(extract_centerline(shape, f, Centerline::Vertical, 1.5, 10), Error);
  EXPECT_THROW(extract_centerline(shape, f, Centerline::Vertical, 0.5, 1), Error);
}
