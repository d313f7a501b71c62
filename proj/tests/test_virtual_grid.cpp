#include <gtest/gtest.h>

#include "vip/virtual_grid.hpp"

using namespace vip;

namespace {

void expect_point(const Point& a, double x, double y) {
  EXPECT_NEAR(a[0], x, 1e-14);
  EXPECT_NEAR(a[1], y, 1e-14);
}

}  // namespace

TEST(VirtualGrid, PeriodicPointsMatchNodes) {
  const Domain d = Domain::unit_square(true);
  const VirtualGrid grid(d, 0.125);
  const NodeSet nodes = generate_regular(d, 0.125);
  ASSERT_EQ(grid.size(), nodes.size());
  for (std::size_t J = 0; J < grid.size(); ++J) EXPECT_EQ(grid.point(J), nodes[J]);
  const auto co = colocated_nodes(nodes, grid);
  for (std::size_t J = 0; J < co.size(); ++J) EXPECT_EQ(co[J], static_cast<int>(J));
}

TEST(VirtualGrid, NonPeriodicUsesInteriorLattice) {
  const Domain d(Point(-0.5, 0.0), Point(1.5, 2.0), {false, false});
  const VirtualGrid grid(d, 0.25);
  EXPECT_EQ(grid.counts()[0], 7);
  EXPECT_EQ(grid.counts()[1], 7);
  expect_point(grid.point(0), -0.25, 0.25);
  const NodeSet nodes = generate_regular(d, 0.25);
  for (int idx : colocated_nodes(nodes, grid)) {
    ASSERT_GE(idx, 0);
    EXPECT_EQ(nodes.role(idx), NodeRole::Interior);
  }
}

TEST(StaggeredPoints, HalfSpacingOffsets) {
  // Periodic square shifted so that (0.5, 0.5) is a lattice point at h = 0.1.
  const Domain d(Point(0.05, 0.05), Point(1.05, 1.05), {true, true});
  const VirtualGrid grid(d, 0.1);
  const StaggeredStencil s = staggered_points(grid);
  EXPECT_EQ(4 * s.size(), 4 * grid.size());
  const std::size_t J = 4 + 4 * 10;
  expect_point(grid.point(J), 0.5, 0.5);
  expect_point(s(J, StaggeredStencil::kXPlus), 0.55, 0.5);
  expect_point(s(J, StaggeredStencil::kXMinus), 0.45, 0.5);
  expect_point(s(J, StaggeredStencil::kYPlus), 0.5, 0.55);
  expect_point(s(J, StaggeredStencil::kYMinus), 0.5, 0.45);
}

TEST(StaggeredPoints, WrapAcrossPeriodicSeam) {
  const Domain d = Domain::unit_square(true);
  const VirtualGrid grid(d, 0.1);
  const StaggeredStencil s = staggered_points(grid);
  // Point (0.95, 0.45): x+ offset lands on 1.0, which wraps to 0.0.
  const std::size_t J = 9 + 4 * 10;
  expect_point(grid.point(J), 0.95, 0.45);
  expect_point(s(J, StaggeredStencil::kXPlus), 0.0, 0.45);
  expect_point(s(J, StaggeredStencil::kXMinus), 0.9, 0.45);
}

TEST(StaggeredPoints, CommuteWithLatticeTranslation) {
  const Domain d = Domain::unit_square(true);
  const VirtualGrid grid(d, 0.125);
  const StaggeredStencil s = staggered_points(grid);
  const int n = grid.counts()[0];
  for (std::size_t J = 0; J < grid.size(); ++J) {
    const auto [k, j] = grid.lattice_index(J);
    const std::size_t Jt = static_cast<std::size_t>(j) * n + (k + 1) % n;
    for (int slot = 0; slot < 4; ++slot) {
      const Point moved = d.wrap(s(J, slot) + Point(0.125, 0.0));
      EXPECT_LT(d.distance(moved, s(Jt, slot)), 1e-14);
    }
  }
}

TEST(Realization, ColocatedLatticeHasFullRowRank) {
  const Domain d = Domain::unit_square(true);
  const NodeSet nodes = generate_regular(d, 0.125);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 * 0.125);
  const auto rep = realization_check(shape, VirtualGrid(d, 0.125).points());
  EXPECT_TRUE(rep.full_row_rank);
  EXPECT_EQ(rep.rank, 64);
  EXPECT_GT(rep.min_singular_value, 1e-3);
  EXPECT_EQ(rep.method, "dense-svd");
}

TEST(Realization, DuplicatedEvaluationPointIsRankDeficient) {
  const Domain d = Domain::unit_square(true);
  const NodeSet nodes = generate_regular(d, 0.125);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 * 0.125);
  auto pts = VirtualGrid(d, 0.125).points();
  pts.resize(10);
  pts.push_back(pts[3]);
  const auto rep = realization_check(shape, pts);
  EXPECT_FALSE(rep.full_row_rank);
  EXPECT_EQ(rep.rank, 10);
  EXPECT_LT(rep.min_singular_value, 1e-12);
}

TEST(Realization, TooFewNodes) {
  const Domain d = Domain::unit_square(true);
  const NodeSet nodes = generate_regular(d, 0.125);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 * 0.125);
  auto pts = VirtualGrid(d, 0.125).points();
  pts.push_back(Point(0.3, 0.3));
  try {
    realization_check(shape, pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeMismatch);
  }
}

TEST(Realization, SparsePathAgreesWithDense) {
  const Domain d = Domain::unit_square(false);
  const NodeSet nodes = generate_regular(d, 1.0 / 64);
  const ShapeFunctions<> shape(nodes, PolynomialBasis(2), 2.6 / 64);
  const auto pts = VirtualGrid(d, 1.0 / 64).points();
  const auto rep = realization_check(shape, pts);
  EXPECT_EQ(rep.method, "sparse-qr");
  EXPECT_TRUE(rep.full_row_rank);
  auto dup = pts;
  dup.push_back(pts[100]);
  EXPECT_FALSE(realization_check(shape, dup).full_row_rank);

  const NodeSet coarse = generate_regular(d, 0.125);
  const ShapeFunctions<> small(coarse, PolynomialBasis(2), 2.6 * 0.125);
  const auto grid_pts = VirtualGrid(d, 0.125).points();
  const auto dense = realization_check(small, grid_pts);
  const auto sparse = realization_check(small, grid_pts, 0);
  EXPECT_EQ(dense.method, "dense-svd");
  EXPECT_EQ(sparse.method, "sparse-qr");
  EXPECT_EQ(dense.rank, sparse.rank);
}
