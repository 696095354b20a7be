#pragma once
// Conforming triangular meshes of polygonal domains: construction, validation,
// uniform red refinement and the ASCII node/element file format.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "teig/error.hpp"

namespace teig {

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x1, s * a.x2}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double cross(Point2 a, Point2 b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double distance(Point2 a, Point2 b) { return std::hypot(a.x1 - b.x1, a.x2 - b.x2); }
inline Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x1 + b.x1), 0.5 * (a.x2 + b.x2)}; }

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
inline double signed_area2(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Where a vertex of a refined mesh came from.
struct VertexOrigin {
  int coarse_vertex = -1;            // >= 0 if the vertex is a coarse vertex
  Edge coarse_edge{-1, -1};          // endpoints of the bisected coarse edge otherwise
};

/// Links a red-refined mesh to the mesh it was refined from.
struct ParentMap {
  std::vector<int> parent_triangle;  // per fine triangle
  std::vector<int> child_slot;       // 0..2 corner children, 3 the middle child
  std::vector<VertexOrigin> vertex_origin;  // per fine vertex
};

struct Mesh {
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> boundary_edges;
  int level = 0;
  std::optional<ParentMap> parent;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
};

/// Unique undirected edges of a mesh, numbered in order of first appearance
/// when walking triangles and their local edges (v0v1, v1v2, v2v0).
struct EdgeTopology {
  std::vector<Edge> edges;                      // stored with edges[e][0] < edges[e][1]
  std::vector<std::array<int, 3>> triangle_edges;  // local edge l joins vertices l and (l+1)%3
  std::vector<int> edge_triangle_count;

  std::size_t num_edges() const { return edges.size(); }
};

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace detail

inline EdgeTopology build_edges(const Mesh& mesh) {
  EdgeTopology topo;
  topo.triangle_edges.resize(mesh.triangles.size());
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(mesh.triangles.size() * 2);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int l = 0; l < 3; ++l) {
      const int a = tri[l];
      const int b = tri[(l + 1) % 3];
      auto [it, inserted] = index.try_emplace(detail::edge_key(a, b), static_cast<int>(topo.edges.size()));
      if (inserted) {
        topo.edges.push_back({std::min(a, b), std::max(a, b)});
        topo.edge_triangle_count.push_back(0);
      }
      topo.triangle_edges[t][l] = it->second;
      ++topo.edge_triangle_count[it->second];
    }
  }
  return topo;
}

/// Maximum edge length.
inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& tri : mesh.triangles)
    for (int l = 0; l < 3; ++l)
      h = std::max(h, distance(mesh.vertices[tri[l]], mesh.vertices[tri[(l + 1) % 3]]));
  return h;
}

// ---------------------------------------------------------------------------
// Validation

/// Lists every violated mesh invariant. An empty result means the mesh is a
/// valid conforming, counter-clockwise triangulation of a simply connected
/// domain with a consistent boundary edge list.
inline std::vector<std::string> validate(const Mesh& mesh) {
  std::vector<std::string> report;
  const int nv = static_cast<int>(mesh.vertices.size());
  auto in_range = [nv](int i) { return i >= 0 && i < nv; };

  for (int i = 0; i < nv; ++i) {
    const auto& p = mesh.vertices[i];
    if (!std::isfinite(p.x1) || !std::isfinite(p.x2))
      report.push_back("vertex " + std::to_string(i) + " has a non-finite coordinate");
  }
  bool indices_ok = true;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (!in_range(tri[0]) || !in_range(tri[1]) || !in_range(tri[2])) {
      report.push_back("triangle " + std::to_string(t) + " references a vertex out of range");
      indices_ok = false;
      continue;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      report.push_back("triangle " + std::to_string(t) + " repeats a vertex");
      indices_ok = false;
      continue;
    }
    const double a2 = signed_area2(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    if (!(a2 > 0.0))
      report.push_back("triangle " + std::to_string(t) + " has non-positive signed area (clockwise or degenerate)");
  }
  for (std::size_t b = 0; b < mesh.boundary_edges.size(); ++b) {
    const auto& e = mesh.boundary_edges[b];
    if (!in_range(e[0]) || !in_range(e[1])) {
      report.push_back("boundary edge " + std::to_string(b) + " references a vertex out of range");
      indices_ok = false;
    }
  }
  if (!indices_ok) return report;

  const EdgeTopology topo = build_edges(mesh);
  std::vector<std::uint64_t> expected_boundary;
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    if (topo.edge_triangle_count[e] > 2)
      report.push_back("edge (" + std::to_string(topo.edges[e][0]) + "," + std::to_string(topo.edges[e][1]) +
                       ") is shared by more than two triangles");
    if (topo.edge_triangle_count[e] == 1)
      expected_boundary.push_back(detail::edge_key(topo.edges[e][0], topo.edges[e][1]));
  }
  std::vector<std::uint64_t> declared;
  declared.reserve(mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) declared.push_back(detail::edge_key(e[0], e[1]));
  std::sort(expected_boundary.begin(), expected_boundary.end());
  std::sort(declared.begin(), declared.end());
  if (std::adjacent_find(declared.begin(), declared.end()) != declared.end())
    report.push_back("boundary edge list contains duplicates");
  declared.erase(std::unique(declared.begin(), declared.end()), declared.end());
  if (declared != expected_boundary)
    report.push_back("boundary edge list differs from the set of edges belonging to exactly one triangle (" +
                     std::to_string(declared.size()) + " declared, " + std::to_string(expected_boundary.size()) +
                     " expected)");

  // Duplicate vertices and hanging nodes, located with a uniform bucket grid.
  if (nv > 0) {
    double xmin = mesh.vertices[0].x1, xmax = xmin, ymin = mesh.vertices[0].x2, ymax = ymin;
    for (const auto& p : mesh.vertices) {
      xmin = std::min(xmin, p.x1); xmax = std::max(xmax, p.x1);
      ymin = std::min(ymin, p.x2); ymax = std::max(ymax, p.x2);
    }
    const double extent = std::max({xmax - xmin, ymax - ymin, 1e-300});
    const double tol = 1e-12 * extent;
    const int nb = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nv))));
    const double cell = extent / nb * (1.0 + 1e-9);
    auto bucket_of = [&](double x, double y) {
      int i = std::clamp(static_cast<int>((x - xmin) / cell), 0, nb - 1);
      int j = std::clamp(static_cast<int>((y - ymin) / cell), 0, nb - 1);
      return std::pair{i, j};
    };
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nb) * nb);
    for (int i = 0; i < nv; ++i) {
      auto [bi, bj] = bucket_of(mesh.vertices[i].x1, mesh.vertices[i].x2);
      buckets[static_cast<std::size_t>(bj) * nb + bi].push_back(i);
    }
    auto for_each_near = [&](double x0, double y0, double x1, double y1, auto&& fn) {
      auto [i0, j0] = bucket_of(x0 - tol, y0 - tol);
      auto [i1, j1] = bucket_of(x1 + tol, y1 + tol);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
          for (int v : buckets[static_cast<std::size_t>(j) * nb + i]) fn(v);
    };
    int duplicates = 0;
    for (int i = 0; i < nv; ++i) {
      const auto p = mesh.vertices[i];
      for_each_near(p.x1, p.x2, p.x1, p.x2, [&](int v) {
        if (v > i && distance(mesh.vertices[v], p) <= tol) {
          if (duplicates++ < 10)
            report.push_back("vertices " + std::to_string(i) + " and " + std::to_string(v) + " coincide");
        }
      });
    }
    int hanging = 0;
    for (const auto& e : topo.edges) {
      const Point2 a = mesh.vertices[e[0]], b = mesh.vertices[e[1]];
      const double len = distance(a, b);
      for_each_near(std::min(a.x1, b.x1), std::min(a.x2, b.x2), std::max(a.x1, b.x1), std::max(a.x2, b.x2),
                    [&](int v) {
                      if (v == e[0] || v == e[1]) return;
                      const Point2 p = mesh.vertices[v];
                      const double s = ((p.x1 - a.x1) * (b.x1 - a.x1) + (p.x2 - a.x2) * (b.x2 - a.x2)) / (len * len);
                      if (s <= 1e-12 || s >= 1.0 - 1e-12) return;
                      if (std::abs(cross(b - a, p - a)) / len <= tol) {
                        if (hanging++ < 10)
                          report.push_back("hanging node: vertex " + std::to_string(v) + " lies inside edge (" +
                                           std::to_string(e[0]) + "," + std::to_string(e[1]) + ")");
                      }
                    });
    }
  }

  // Euler relation for a simply connected domain: V - E + T = 1.
  std::vector<char> used(static_cast<std::size_t>(nv), 0);
  for (const auto& tri : mesh.triangles)
    for (int v : tri) used[v] = 1;
  const long used_count = std::count(used.begin(), used.end(), char{1});
  if (used_count != nv) report.push_back(std::to_string(nv - used_count) + " vertices belong to no triangle");
  const long euler = used_count - static_cast<long>(topo.edges.size()) + static_cast<long>(mesh.triangles.size());
  if (!mesh.triangles.empty() && euler != 1)
    report.push_back("Euler relation V - E + T = " + std::to_string(euler) + " (expected 1)");
  return report;
}

// ---------------------------------------------------------------------------
// Refinement

/// Uniform red refinement: every triangle is split into four similar
/// children through its edge midpoints. Coarse vertices keep their indices;
/// the midpoint of coarse edge e becomes vertex V + e.
inline Mesh refine_red(const Mesh& coarse) {
  const EdgeTopology topo = build_edges(coarse);
  const int nv = static_cast<int>(coarse.vertices.size());

  Mesh fine;
  fine.level = coarse.level + 1;
  fine.vertices = coarse.vertices;
  fine.vertices.reserve(nv + topo.edges.size());
  ParentMap pm;
  pm.vertex_origin.resize(nv + topo.edges.size());
  for (int v = 0; v < nv; ++v) pm.vertex_origin[v].coarse_vertex = v;
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto& ed = topo.edges[e];
    fine.vertices.push_back(midpoint(coarse.vertices[ed[0]], coarse.vertices[ed[1]]));
    pm.vertex_origin[nv + e].coarse_edge = ed;
  }

  fine.triangles.reserve(4 * coarse.triangles.size());
  pm.parent_triangle.reserve(4 * coarse.triangles.size());
  pm.child_slot.reserve(4 * coarse.triangles.size());
  for (std::size_t t = 0; t < coarse.triangles.size(); ++t) {
    const auto& tri = coarse.triangles[t];
    const auto& te = topo.triangle_edges[t];
    const int m01 = nv + te[0], m12 = nv + te[1], m20 = nv + te[2];
    const std::array<Triangle, 4> children{{{tri[0], m01, m20}, {m01, tri[1], m12}, {m20, m12, tri[2]}, {m01, m12, m20}}};
    for (int c = 0; c < 4; ++c) {
      fine.triangles.push_back(children[c]);
      pm.parent_triangle.push_back(static_cast<int>(t));
      pm.child_slot.push_back(c);
    }
  }

  std::unordered_map<std::uint64_t, int> edge_index;
  edge_index.reserve(topo.edges.size());
  for (std::size_t e = 0; e < topo.edges.size(); ++e)
    edge_index.emplace(detail::edge_key(topo.edges[e][0], topo.edges[e][1]), static_cast<int>(e));
  fine.boundary_edges.reserve(2 * coarse.boundary_edges.size());
  for (const auto& be : coarse.boundary_edges) {
    const int mid = nv + edge_index.at(detail::edge_key(be[0], be[1]));
    fine.boundary_edges.push_back({be[0], mid});
    fine.boundary_edges.push_back({mid, be[1]});
  }
  fine.parent = std::move(pm);
  return fine;
}

// ---------------------------------------------------------------------------
// Built-in domains

namespace detail {

/// Structured grid of nx*ny square cells of side `cell` anchored at the
/// origin. `kind(i,j)` is 0 (absent), 1 (full cell, split into two
/// triangles) or 2 (lower-left half cell only). Full cells are split along
/// the diagonal through any cell corner whose two cell edges both lie on the
/// domain boundary, so no triangle gets two boundary edges at a convex corner.
template <class Kind>
Mesh structured_grid(int nx, int ny, double cell, Kind&& kind) {
  auto present = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && kind(i, j) != 0; };
  std::vector<int> vid(static_cast<std::size_t>(nx + 1) * (ny + 1), -1);
  auto id = [&](int i, int j) -> int& { return vid[static_cast<std::size_t>(j) * (nx + 1) + i]; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = kind(i, j);
      if (k == 0) continue;
      id(i, j) = id(i + 1, j) = id(i, j + 1) = 0;
      if (k == 1) id(i + 1, j + 1) = 0;
    }
  Mesh mesh;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (id(i, j) == 0) {
        id(i, j) = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back({i * cell, j * cell});
      }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = kind(i, j);
      if (k == 0) continue;
      const int c00 = id(i, j), c10 = id(i + 1, j), c01 = id(i, j + 1);
      if (k == 2) {
        mesh.triangles.push_back({c00, c10, c01});
        continue;
      }
      const int c11 = id(i + 1, j + 1);
      const bool bottom = !present(i, j - 1), top = !present(i, j + 1);
      const bool left = !present(i - 1, j), right = !present(i + 1, j);
      const bool anti = ((bottom && right) || (top && left)) && !((bottom && left) || (top && right));
      if (anti) {
        mesh.triangles.push_back({c00, c10, c01});
        mesh.triangles.push_back({c10, c11, c01});
      } else {
        mesh.triangles.push_back({c00, c10, c11});
        mesh.triangles.push_back({c00, c11, c01});
      }
    }
  const EdgeTopology topo = build_edges(mesh);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (int l = 0; l < 3; ++l)
      if (topo.edge_triangle_count[topo.triangle_edges[t][l]] == 1)
        mesh.boundary_edges.push_back({mesh.triangles[t][l], mesh.triangles[t][(l + 1) % 3]});
  return mesh;
}

inline int cells_per_unit(double target_h) {
  if (!(target_h > 0.0) || !std::isfinite(target_h)) throw ConfigError("target mesh size must be positive and finite");
  return std::max(1, static_cast<int>(std::ceil(1.0 / target_h - 1e-9)));
}

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = signed_area2(c, d, a), d2 = signed_area2(c, d, b);
  const double d3 = signed_area2(a, b, c), d4 = signed_area2(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on_segment = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x1, q.x1) <= r.x1 && r.x1 <= std::max(p.x1, q.x1) && std::min(p.x2, q.x2) <= r.x2 &&
           r.x2 <= std::max(p.x2, q.x2);
  };
  return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) || (d3 == 0 && on_segment(a, b, c)) ||
         (d4 == 0 && on_segment(a, b, d));
}

inline bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c) {
  return signed_area2(a, b, p) >= 0 && signed_area2(b, c, p) >= 0 && signed_area2(c, a, p) >= 0;
}

}  // namespace detail

/// Unit square [0,1]^2 on a structured grid of cell size <= target_h.
inline Mesh unit_square_mesh(double target_h) {
  const int n = detail::cells_per_unit(target_h);
  return detail::structured_grid(n, n, 1.0 / n, [](int, int) { return 1; });
}

/// Right triangle with unit legs along the axes.
inline Mesh right_triangle_mesh(double target_h) {
  const int n = detail::cells_per_unit(target_h);
  return detail::structured_grid(n, n, 1.0 / n, [n](int i, int j) { return i + j < n - 1 ? 1 : (i + j == n - 1 ? 2 : 0); });
}

/// L-shaped domain [0,2]^2 \ [1,2]^2.
inline Mesh l_shape_mesh(double target_h) {
  const int n = detail::cells_per_unit(target_h);
  return detail::structured_grid(2 * n, 2 * n, 1.0 / n, [n](int i, int j) { return (i >= n && j >= n) ? 0 : 1; });
}

/// Throws ConfigError if the closed polyline is not a simple polygon.
inline void check_simple_polygon(const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) throw ConfigError("polygon needs at least 3 vertices, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(poly[i].x1) || !std::isfinite(poly[i].x2))
      throw ConfigError("polygon vertex " + std::to_string(i) + " is not finite");
    if (poly[i] == poly[(i + 1) % n])
      throw ConfigError("polygon edge " + std::to_string(i) + " has zero length");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const Point2 a = poly[i], b = poly[(i + 1) % n], c = poly[j], d = poly[(j + 1) % n];
      if (adjacent) {
        // Adjacent edges may only share their common vertex.
        const Point2 shared = (j == i + 1) ? b : a;
        const Point2 p = (j == i + 1) ? a : b;
        const Point2 q = (j == i + 1) ? d : c;
        if (signed_area2(p, shared, q) == 0.0 &&
            ((q.x1 - shared.x1) * (p.x1 - shared.x1) + (q.x2 - shared.x2) * (p.x2 - shared.x2)) > 0.0)
          throw ConfigError("polygon is not simple: edges " + std::to_string(i) + " and " + std::to_string(j) +
                            " overlap");
        continue;
      }
      if (detail::segments_intersect(a, b, c, d))
        throw ConfigError("polygon is not simple: edges " + std::to_string(i) + " and " + std::to_string(j) +
                          " intersect");
    }
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) area2 += cross(poly[i], poly[(i + 1) % n]);
  if (area2 == 0.0) throw ConfigError("polygon has zero area");
}

/// Triangulates a simple polygon by ear clipping (best-angle ear first) and
/// red-refines until the maximum edge length is at most 1.5 * target_h.
inline Mesh polygon_mesh(std::vector<Point2> poly, double target_h) {
  if (!(target_h > 0.0) || !std::isfinite(target_h)) throw ConfigError("target mesh size must be positive and finite");
  check_simple_polygon(poly);
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) area2 += cross(poly[i], poly[(i + 1) % poly.size()]);
  if (area2 < 0.0) std::reverse(poly.begin(), poly.end());

  Mesh mesh;
  mesh.vertices = poly;
  std::vector<int> ring(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) ring[i] = static_cast<int>(i);
  while (ring.size() > 3) {
    const std::size_t n = ring.size();
    double best_quality = -1.0;
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      const int ia = ring[(i + n - 1) % n], ib = ring[i], ic = ring[(i + 1) % n];
      const Point2 a = poly[ia], b = poly[ib], c = poly[ic];
      if (signed_area2(a, b, c) <= 0.0) continue;
      bool contains = false;
      for (std::size_t j = 0; j < n && !contains; ++j) {
        const int v = ring[j];
        if (v == ia || v == ib || v == ic) continue;
        contains = detail::point_in_triangle(poly[v], a, b, c);
      }
      if (contains) continue;
      // Quality: smallest angle of the candidate ear.
      const double la = distance(b, c), lb = distance(a, c), lc = distance(a, b);
      const double area = 0.5 * signed_area2(a, b, c);
      const double q = 2.0 * area / std::max({la * lb, lb * lc, lc * la});  // sin of smallest angle
      if (q > best_quality) {
        best_quality = q;
        best = i;
      }
    }
    if (best == n) throw ConfigError("polygon triangulation failed: no ear found (polygon not simple?)");
    mesh.triangles.push_back({ring[(best + n - 1) % n], ring[best], ring[(best + 1) % n]});
    ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(best));
  }
  mesh.triangles.push_back({ring[0], ring[1], ring[2]});
  for (std::size_t i = 0; i < poly.size(); ++i)
    mesh.boundary_edges.push_back({static_cast<int>(i), static_cast<int>((i + 1) % poly.size())});

  while (mesh_size(mesh) > 1.5 * target_h) mesh = refine_red(mesh);
  mesh.level = 0;
  mesh.parent.reset();
  return mesh;
}

/// Built-in domain by name: "unit_square", "right_triangle" or "l_shape".
inline Mesh build_builtin_domain(std::string_view name, double target_h) {
  if (name == "unit_square") return unit_square_mesh(target_h);
  if (name == "right_triangle") return right_triangle_mesh(target_h);
  if (name == "l_shape") return l_shape_mesh(target_h);
  throw ConfigError("unknown built-in domain '" + std::string(name) +
                    "' (expected unit_square, right_triangle, l_shape or a polygon)");
}

// ---------------------------------------------------------------------------
// ASCII format: "NV NT NB", NV lines "x1 x2", NT lines "i j k", NB lines
// "i j"; indices 1-based; lines starting with '#' are comments.

namespace detail {

class LineTokenizer {
 public:
  explicit LineTokenizer(std::istream& in) : in_(in) {}

  /// Advances to the next non-comment, non-blank line. False at EOF.
  bool next_line() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      pos_ = 0;
      const auto first = line_.find_first_not_of(" \t\r");
      if (first == std::string::npos || line_[first] == '#') continue;
      return true;
    }
    return false;
  }

  template <class T>
  T read(const char* what) {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) ++pos_;
    if (pos_ >= line_.size()) fail(std::string("expected ") + what + ", found end of line");
    const char* begin = line_.data() + pos_;
    const char* end = line_.data() + line_.size();
    T value{};
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || (ptr != end && *ptr != ' ' && *ptr != '\t' && *ptr != '\r'))
      fail(std::string("expected ") + what);
    pos_ = static_cast<std::size_t>(ptr - line_.data());
    return value;
  }

  void expect_end() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t' || line_[pos_] == '\r')) ++pos_;
    if (pos_ < line_.size() && line_[pos_] != '#') fail("unexpected trailing text");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_no_) + ", column " + std::to_string(pos_ + 1) + ": " + msg, pos_,
                     line_no_, pos_ + 1);
  }

  [[noreturn]] void fail_eof(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_no_ + 1) + ": unexpected end of file, expected " + what, 0,
                     line_no_ + 1, 1);
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Mesh read_mesh(std::istream& in) {
  detail::LineTokenizer tok(in);
  if (!tok.next_line()) tok.fail_eof("header 'NV NT NB'");
  const long nv = tok.read<long>("vertex count");
  const long nt = tok.read<long>("triangle count");
  const long nb = tok.read<long>("boundary edge count");
  tok.expect_end();
  if (nv < 0 || nt < 0 || nb < 0) tok.fail("counts must be non-negative");

  Mesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!tok.next_line()) tok.fail_eof("vertex " + std::to_string(i + 1));
    const double x = tok.read<double>("x1 coordinate");
    const double y = tok.read<double>("x2 coordinate");
    tok.expect_end();
    mesh.vertices.push_back({x, y});
  }
  auto index = [&](const char* what) {
    const long v = tok.read<long>(what);
    if (v < 1 || v > nv) tok.fail("vertex index " + std::to_string(v) + " out of range 1.." + std::to_string(nv));
    return static_cast<int>(v - 1);
  };
  mesh.triangles.reserve(static_cast<std::size_t>(nt));
  for (long t = 0; t < nt; ++t) {
    if (!tok.next_line()) tok.fail_eof("triangle " + std::to_string(t + 1));
    const int a = index("vertex index"), b = index("vertex index"), c = index("vertex index");
    tok.expect_end();
    mesh.triangles.push_back({a, b, c});
  }
  mesh.boundary_edges.reserve(static_cast<std::size_t>(nb));
  for (long e = 0; e < nb; ++e) {
    if (!tok.next_line()) tok.fail_eof("boundary edge " + std::to_string(e + 1));
    const int a = index("vertex index"), b = index("vertex index");
    tok.expect_end();
    mesh.boundary_edges.push_back({a, b});
  }
  if (tok.next_line()) tok.fail("unexpected data after the declared entities");
  return mesh;
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "# teig mesh: NV NT NB, vertices, triangles (1-based, CCW), boundary edges\n";
  out << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' ' << mesh.boundary_edges.size() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices) out << p.x1 << ' ' << p.x2 << '\n';
  for (const auto& t : mesh.triangles) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  for (const auto& e : mesh.boundary_edges) out << e[0] + 1 << ' ' << e[1] + 1 << '\n';
}

inline Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file '" + path + "'");
  try {
    return read_mesh(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.offset(), e.line(), e.column());
  }
}

inline void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file '" + path + "'");
  write_mesh(out, mesh);
  if (!out) throw Error("write failed for mesh file '" + path + "'");
}

}  // namespace teig
