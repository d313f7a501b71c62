#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "vip/nodes.hpp"

using namespace vip;

TEST(Domain, WrapAndMinimalImage) {
  const Domain d = Domain::unit_square(true);
  EXPECT_NEAR(d.wrap(Point(1.05, -0.25))[0], 0.05, 1e-15);
  EXPECT_NEAR(d.wrap(Point(1.05, -0.25))[1], 0.75, 1e-15);
  EXPECT_NEAR(d.distance(Point(0.99, 0.0), Point(0.01, 0.0)), 0.02, 1e-15);
}

TEST(Domain, WrappedDistanceIsAMetric) {
  const Domain d(Point(-0.5, 0.0), Point(1.5, 2.0), {true, false});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-0.5, 1.5), uy(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const Point a(ux(rng), uy(rng)), b(ux(rng), uy(rng)), c(ux(rng), uy(rng));
    EXPECT_DOUBLE_EQ(d.distance(a, b), d.distance(b, a));
    EXPECT_EQ(d.distance(a, a), 0.0);
    EXPECT_LE(d.distance(a, c), d.distance(a, b) + d.distance(b, c) + 1e-14);
  }
  EXPECT_EQ(d.distance(Point(-0.5, 1.0), Point(1.5, 1.0)), 0.0);
}

TEST(Domain, RejectsEmptyRectangle) {
  EXPECT_THROW(Domain(Point(0, 0), Point(0, 1), {false, false}), Error);
}

TEST(GenerateRegular, PeriodicCounts) {
  EXPECT_EQ(generate_regular(Domain::unit_square(true), 0.5).size(), 4u);
  EXPECT_EQ(generate_regular(Domain::unit_square(true), 0.25).size(), 16u);
}

TEST(GenerateRegular, NonPeriodicConvention) {
  // [-0.5,1.5]x[0,2], h = 0.25: 9x9 lattice sites with the 4 corners dropped.
  const Domain d(Point(-0.5, 0.0), Point(1.5, 2.0), {false, false});
  const NodeSet nodes = generate_regular(d, 0.25);
  EXPECT_EQ(nodes.size(), 77u);
  int boundary = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) boundary += nodes.role(i) == NodeRole::Boundary;
  EXPECT_EQ(boundary, 28);
}

TEST(GenerateRegular, PeriodicSitesAreCellCentres) {
  const NodeSet nodes = generate_regular(Domain::unit_square(true), 0.25);
  EXPECT_DOUBLE_EQ(nodes[0][0], 0.125);
  EXPECT_DOUBLE_EQ(nodes[0][1], 0.125);
  EXPECT_DOUBLE_EQ(nodes[5][0], 0.375);
  EXPECT_DOUBLE_EQ(nodes[5][1], 0.375);
}

TEST(GenerateRegular, NonconformingSpacing) {
  try {
    generate_regular(Domain::unit_square(true), 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonconformingSpacing);
  }
}

TEST(NodeSet, RejectsCoincidentNodes) {
  std::vector<Point> pts{Point(0.1, 0.1), Point(0.5, 0.5), Point(0.1, 0.1)};
  try {
    NodeSet(Domain::unit_square(false), pts, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateNode);
  }
  // Coincident only after wrapping.
  std::vector<Point> wrapped{Point(0.0, 0.5), Point(1.0, 0.5)};
  EXPECT_THROW(NodeSet(Domain::unit_square(true), wrapped, 0.2), Error);
}

TEST(PerturbNodes, ZeroAmplitudeIsIdentity) {
  const NodeSet nodes = generate_regular(Domain::unit_square(false), 1.0 / 8);
  const NodeSet same = perturb_nodes(nodes, 0.0, 3);
  for (std::size_t i = 0; i < nodes.size(); ++i) EXPECT_EQ(nodes[i], same[i]);
}

TEST(PerturbNodes, DeterministicAndBounded) {
  const double h = 1.0 / 16;
  const NodeSet nodes = generate_regular(Domain::unit_square(true), h);
  const NodeSet a = perturb_nodes(nodes, 0.2, 42);
  const NodeSet b = perturb_nodes(nodes, 0.2, 42);
  const NodeSet c = perturb_nodes(nodes, 0.2, 43);
  bool differs = false;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    differs |= a[i] != c[i];
    EXPECT_LE(nodes.domain().distance(a[i], nodes[i]), 0.0125 + 1e-15);
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(perturb_nodes(nodes, 0.45, 1), Error);
}

TEST(PerturbNodes, BoundaryNodesStayOnTheirEdge) {
  const NodeSet nodes = generate_regular(Domain::unit_square(false), 0.125);
  const NodeSet p = perturb_nodes(nodes, 0.3, 9);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    EXPECT_EQ(p.role(i), nodes.role(i));
  }
}

TEST(NeighborQuery, BasicCases) {
  const Domain d = Domain::unit_square(true);
  const NodeSet one(d, {Point(0.3, 0.3)}, 0.1);
  EXPECT_TRUE(one.neighbors(Point(0.3, 0.3), 0.0).empty());
  EXPECT_EQ(one.neighbors(Point(0.3, 0.3), 0.1), std::vector<int>{0});
  const NodeSet seam(d, {Point(0.99, 0.0), Point(0.5, 0.5)}, 0.05);
  EXPECT_EQ(seam.neighbors(Point(0.01, 0.0), 0.05), std::vector<int>{0});
}

TEST(NeighborQuery, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (bool periodic : {true, false}) {
    const Domain d(Point(-0.5, 0.0), Point(1.5, 2.0), {periodic, !periodic});
    std::uniform_real_distribution<double> ux(-0.5, 1.5), uy(0.0, 2.0), ur(0.0, 0.7);
    std::vector<Point> pts;
    for (int i = 0; i < 500; ++i) pts.emplace_back(ux(rng), uy(rng));
    const NodeSet nodes(d, pts, 0.2);
    for (int q = 0; q < 200; ++q) {
      const Point p(ux(rng), uy(rng));
      const double r = ur(rng);
      EXPECT_EQ(nodes.neighbors(p, r), nodes.neighbors_brute_force(p, r));
    }
  }
}

TEST(NodeCsv, RoundTrip) {
  const NodeSet nodes = perturb_nodes(generate_regular(Domain::unit_square(false), 0.125), 0.3, 5);
  std::stringstream ss;
  save_nodes_csv(nodes, ss);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, 4), "x,y\n");
  EXPECT_EQ(text.find('e'), std::string::npos);
  const NodeSet back = load_nodes_csv(nodes.domain(), ss, nodes.bucket_width());
  ASSERT_EQ(back.size(), nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) EXPECT_EQ(back[i], nodes[i]);
}

TEST(NodeCsv, RejectsBadHeader) {
  std::stringstream ss("a,b\n0,0\n");
  EXPECT_THROW(load_nodes_csv(Domain::unit_square(false), ss, 0.1), Error);
}
