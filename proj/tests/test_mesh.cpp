#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "teig/mesh.hpp"

using namespace teig;

namespace {

double area(const Mesh& m) {
  double a = 0.0;
  for (const auto& t : m.triangles) a += 0.5 * signed_area2(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  return a;
}

Mesh single_triangle() {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_edges = {{0, 1}, {1, 2}, {2, 0}};
  return m;
}

}  // namespace

TEST(BuiltinDomain, UnitSquareHalf) {
  const Mesh m = unit_square_mesh(0.5);
  EXPECT_EQ(m.num_triangles(), 8u);
  EXPECT_EQ(m.num_vertices(), 9u);
  EXPECT_EQ(m.boundary_edges.size(), 8u);
  EXPECT_NEAR(area(m), 1.0, 1e-14);
  EXPECT_TRUE(validate(m).empty());
}

TEST(BuiltinDomain, RightTriangleUnit) {
  const Mesh m = right_triangle_mesh(1.0);
  EXPECT_EQ(m.num_triangles(), 1u);
  EXPECT_EQ(m.num_vertices(), 3u);
  EXPECT_NEAR(area(m), 0.5, 1e-14);
  EXPECT_TRUE(validate(m).empty());
}

TEST(BuiltinDomain, LShapeHalf) {
  const Mesh m = l_shape_mesh(0.5);
  EXPECT_EQ(m.num_triangles(), 24u);
  EXPECT_EQ(m.num_vertices(), 21u);
  // Euler relation for a simply connected triangulation: V - E + T = 1.
  const auto topo = build_edges(m);
  EXPECT_EQ(static_cast<long>(m.num_vertices()) - static_cast<long>(topo.num_edges()) +
                static_cast<long>(m.num_triangles()),
            1);
  EXPECT_NEAR(area(m), 3.0, 1e-14);
  EXPECT_TRUE(validate(m).empty());
}

TEST(BuiltinDomain, ByNameAndUnknownName) {
  EXPECT_EQ(build_builtin_domain("unit_square", 0.25).num_triangles(), 32u);
  EXPECT_THROW(build_builtin_domain("disk", 0.25), ConfigError);
  EXPECT_THROW(unit_square_mesh(0.0), ConfigError);
}

TEST(PolygonDomain, ConvexAndNonConvex) {
  const Mesh sq = polygon_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.3);
  EXPECT_NEAR(area(sq), 1.0, 1e-13);
  EXPECT_TRUE(validate(sq).empty());
  EXPECT_LE(mesh_size(sq), 1.5 * 0.3);
  // Clockwise input is reoriented.
  const Mesh l = polygon_mesh({{0, 0}, {0, 2}, {1, 2}, {1, 1}, {2, 1}, {2, 0}}, 0.5);
  EXPECT_NEAR(area(l), 3.0, 1e-13);
  EXPECT_TRUE(validate(l).empty());
}

TEST(PolygonDomain, SelfIntersectingRejected) {
  EXPECT_THROW(polygon_mesh({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, 0.5), ConfigError);
  EXPECT_THROW(polygon_mesh({{0, 0}, {1, 0}}, 0.5), ConfigError);
}

TEST(Refine, SingleTriangle) {
  const Mesh f = refine_red(single_triangle());
  EXPECT_EQ(f.num_triangles(), 4u);
  EXPECT_EQ(f.num_vertices(), 6u);
  EXPECT_EQ(f.level, 1);
  EXPECT_TRUE(validate(f).empty());
}

TEST(Refine, UnitSquareCountsAndSize) {
  const Mesh c = unit_square_mesh(0.5);
  const Mesh f = refine_red(c);
  EXPECT_EQ(f.num_triangles(), 32u);
  EXPECT_EQ(f.num_vertices(), 25u);
  EXPECT_NEAR(mesh_size(f), 0.5 * mesh_size(c), 1e-14);
}

TEST(Refine, RepeatedCountsNestednessAndValidity) {
  Mesh m = l_shape_mesh(1.0);
  const std::size_t t0 = m.num_triangles();
  for (int level = 1; level <= 3; ++level) {
    const Mesh f = refine_red(m);
    EXPECT_EQ(f.num_triangles(), t0 * (std::size_t{1} << (2 * level)));
    EXPECT_TRUE(validate(f).empty());
    // Coarse vertices are kept with their indices.
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      EXPECT_EQ(f.vertices[v].x1, m.vertices[v].x1);
      EXPECT_EQ(f.vertices[v].x2, m.vertices[v].x2);
    }
    ASSERT_TRUE(f.parent.has_value());
    for (std::size_t t = 0; t < f.num_triangles(); ++t) {
      const int p = f.parent->parent_triangle[t];
      ASSERT_GE(p, 0);
      ASSERT_LT(p, static_cast<int>(m.num_triangles()));
      EXPECT_GE(f.parent->child_slot[t], 0);
      EXPECT_LE(f.parent->child_slot[t], 3);
    }
    for (std::size_t v = 0; v < f.num_vertices(); ++v) {
      const VertexOrigin& o = f.parent->vertex_origin[v];
      if (o.coarse_vertex >= 0) continue;
      const Point2 mid = midpoint(m.vertices[o.coarse_edge[0]], m.vertices[o.coarse_edge[1]]);
      EXPECT_EQ(f.vertices[v].x1, mid.x1);
      EXPECT_EQ(f.vertices[v].x2, mid.x2);
    }
    m = f;
  }
}

TEST(Validate, FlippedTriangleReported) {
  Mesh m = unit_square_mesh(0.5);
  std::swap(m.triangles[3][1], m.triangles[3][2]);
  EXPECT_FALSE(validate(m).empty());
}

TEST(Validate, DuplicatedVertexHangingNodeReported) {
  // Two triangles sharing an edge geometrically but with a duplicated vertex.
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {1, 1}};
  m.triangles = {{0, 1, 2}, {0, 4, 3}};
  m.boundary_edges = {{0, 1}, {1, 2}, {4, 3}, {3, 0}};
  EXPECT_FALSE(validate(m).empty());
}

TEST(Validate, BadIndicesAndBoundaryReported) {
  Mesh m = single_triangle();
  m.triangles[0][2] = 7;
  EXPECT_FALSE(validate(m).empty());
  Mesh b = single_triangle();
  b.boundary_edges.pop_back();
  EXPECT_FALSE(validate(b).empty());
}

TEST(MeshIo, RoundTrip) {
  const Mesh m = refine_red(l_shape_mesh(1.0));
  std::stringstream buf;
  write_mesh(buf, m);
  const Mesh r = read_mesh(buf);
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  ASSERT_EQ(r.triangles, m.triangles);
  ASSERT_EQ(r.boundary_edges, m.boundary_edges);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    EXPECT_EQ(r.vertices[v].x1, m.vertices[v].x1);
    EXPECT_EQ(r.vertices[v].x2, m.vertices[v].x2);
  }
  const auto path = std::filesystem::temp_directory_path() / "teig_mesh_roundtrip.msh";
  save_mesh(m, path.string());
  EXPECT_EQ(load_mesh(path.string()).triangles, m.triangles);
  std::filesystem::remove(path);
}

TEST(MeshIo, CommentsAccepted) {
  std::stringstream in("# header\n3 1 3\n0 0\n# mid comment\n1 0\n0 1\n1 2 3\n1 2\n2 3\n3 1\n");
  const Mesh m = read_mesh(in);
  EXPECT_EQ(m.num_triangles(), 1u);
  EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
}

TEST(MeshIo, MalformedFileReportsPosition) {
  std::stringstream in("3 1 3\n0 0\n1 zero\n0 1\n1 2 3\n1 2\n2 3\n3 1\n");
  try {
    read_mesh(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 0u);
  }
  std::stringstream truncated("3 1 3\n0 0\n1 0\n");
  EXPECT_THROW(read_mesh(truncated), ParseError);
  std::stringstream bad_index("3 1 3\n0 0\n1 0\n0 1\n1 2 4\n1 2\n2 3\n3 1\n");
  EXPECT_THROW(read_mesh(bad_index), Error);
}
