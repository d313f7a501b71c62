#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "vip/study.hpp"

using namespace vip;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST(Csv, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CsvTable t;
  t.header = {"a", "b", "c"};
  for (int i = 0; i < 200; ++i) t.add({u(rng) * std::pow(10.0, i % 40 - 20), std::nullopt, 1.0 / (i + 1)});
  t.add({std::nan(""), HUGE_VAL, -0.0});
  std::istringstream is(to_csv_string(t));
  const CsvTable back = parse_csv(is);
  EXPECT_TRUE(back == t);
  EXPECT_TRUE(std::signbit(*back.rows.back()[2]));
}

TEST(Csv, RejectsRaggedRowsAndGarbage) {
  std::istringstream a("h,e\n1,2\n3\n");
  EXPECT_THROW(parse_csv(a), Error);
  std::istringstream b("h,e\n1,x\n");
  EXPECT_THROW(parse_csv(b), Error);
  CsvTable t;
  t.header = {"h"};
  EXPECT_THROW(t.add({1.0, 2.0}), Error);
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig c = parse(
      "[problem]\nkind = kovasznay\nh = 1/8, 0.0625\nre = 40\n"
      "[discretization]\nlaplacian = direct\n[solver]\npicard_tolerance = 1e-9\n");
  EXPECT_EQ(c.kind, "kovasznay");
  ASSERT_EQ(c.h.size(), 2u);
  EXPECT_DOUBLE_EQ(c.h[0], 0.125);
  EXPECT_DOUBLE_EQ(c.h[1], 0.0625);
  EXPECT_EQ(c.laplacian, LaplacianMode::Direct);
  EXPECT_EQ(c.gradient, GradientMode::Staggered);
  EXPECT_DOUBLE_EQ(c.picard.tol, 1e-9);
  EXPECT_DOUBLE_EQ(c.picard.re, 40.0);
  EXPECT_DOUBLE_EQ(c.dilation, 2.6);

  const RunConfig d = parse("");
  EXPECT_EQ(d.h.size(), 3u);
  EXPECT_EQ(d.entries().size(), 20u);
}

TEST(Config, ErrorsAreConfigErrors) {
  EXPECT_EQ(kind_of("[problem]\nflavour = x\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[problem]\nkind = spectral\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[problem]\nh = 1/16, 1/8\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[problem]\nh = 1/0\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[problem]\nh = eighth\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[problem]\nre = -1\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[discretization]\ndegree = 2.5\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[solver]\nrelaxation = 1.5\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("loose = 1\n"), ErrorKind::Config);
  EXPECT_EQ(kind_of("[problem\nkind = converge\n"), ErrorKind::Config);
}

TEST(Norms, StreamingAndSortedAgree) {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln(0.0, 4.0);
  Eigen::VectorXd v(5000);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = (i % 2 ? -1.0 : 1.0) * ln(rng);
  const double a = scaled_norm(0.01, v), b = scaled_norm_sorted(0.01, v);
  EXPECT_NEAR(a, b, 1e-12 * b);
  EXPECT_NEAR(a, 0.01 * v.norm(), 1e-12 * b);
}

TEST(Norms, OrderNeedsResolvableErrors) {
  EXPECT_NEAR(*observed_order(4e-2, 1e-2, 0.1, 0.05), 2.0, 1e-14);
  EXPECT_FALSE(observed_order(1e-14, 1e-15, 0.1, 0.05));
  EXPECT_FALSE(observed_order(1e-3, 0.0, 0.1, 0.05));
}

TEST(Study, ErrorTableColumns) {
  std::vector<ErrorRecord> one{{0.125, 1.0, 2.0, 3.0, std::nullopt, std::nullopt}};
  EXPECT_EQ(errors_table(one).header, (std::vector<std::string>{"h", "e_DU", "e_P", "e_U"}));
  one.push_back({0.0625, 0.25, 0.5, 0.75, 2.0, 2.0});
  const CsvTable t = errors_table(one);
  EXPECT_EQ(t.header.size(), 6u);
  EXPECT_FALSE(t.rows[0][4].has_value());
  EXPECT_DOUBLE_EQ(*t.rows[1][5], 2.0);
}

TEST(Study, PeriodicConvergence) {
  RunConfig c = parse("[problem]\nh = 1/8, 1/16\n");
  const StudyResult r = run_convergence_study(c);
  ASSERT_TRUE(r.complete) << r.failure;
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_LT(r.records[1].e_du, r.records[0].e_du);
  EXPECT_GT(*r.records[1].order_du, 1.0);
  EXPECT_GT(*r.records[1].order_p, 0.9);
  EXPECT_TRUE(r.finest.has_value());
}

TEST(Study, PolynomialDirichletIsExact) {
  RunConfig c = parse(
      "[problem]\nsolution = polynomial\nboundary = dirichlet\nh = 1/8, 1/16\n"
      "[discretization]\nlaplacian = direct\n");
  const StudyResult r = run_convergence_study(c);
  ASSERT_TRUE(r.complete) << r.failure;
  for (const auto& e : r.records) {
    EXPECT_LT(e.e_u, 1e-7);
    EXPECT_LT(e.e_p, 1e-7);
  }
  EXPECT_FALSE(r.records[1].order_du.has_value() && r.records[0].e_du < kOrderFloor);
}

TEST(Study, CompositeDirichletAbortsWithFlag) {
  RunConfig c = parse("[problem]\nboundary = dirichlet\nh = 1/8\n");
  const StudyResult r = run_convergence_study(c);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.failure_kind, ErrorKind::DimensionMismatch);
  EXPECT_TRUE(r.records.empty());
}

TEST(Study, InfSupTable) {
  RunConfig c = parse("[problem]\nh = 1/8\n");
  const auto rec = run_infsup_study(c);
  ASSERT_EQ(rec.size(), 1u);
  EXPECT_GT(rec[0].mu, 0.05);
  EXPECT_EQ(infsup_table(rec).header, (std::vector<std::string>{"h", "mu"}));
}

TEST(Study, VortexCount) {
  const NodeSet nodes = generate_regular(Domain::unit_square(false), 1.0 / 16);
  Eigen::VectorXd psi(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Point& p = nodes[i];
    psi[static_cast<Eigen::Index>(i)] = -std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
  }
  Point c;
  EXPECT_EQ(count_primary_vortices(nodes, psi, &c), 1);
  EXPECT_NEAR(c[0], 0.5, 1e-12);
  EXPECT_NEAR(c[1], 0.5, 1e-12);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Point& p = nodes[i];
    psi[static_cast<Eigen::Index>(i)] = -std::sin(2 * M_PI * p[0]) * std::sin(M_PI * p[1]);
  }
  psi = psi.cwiseAbs() * -1.0;
  EXPECT_EQ(count_primary_vortices(nodes, psi, nullptr), 2);
}
