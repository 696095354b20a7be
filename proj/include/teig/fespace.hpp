#pragma once
// Continuous Lagrange spaces on triangular meshes, the six-field product
// space of the mixed transmission formulation, and prolongation between
// nested (red-refined) spaces.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "teig/error.hpp"
#include "teig/lagrange.hpp"
#include "teig/linalg/sparse.hpp"
#include "teig/mesh.hpp"

namespace teig {

enum class Constraint { none, zero_boundary, zero_mean };

inline std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::none: return "none";
    case Constraint::zero_boundary: return "zero_boundary";
    case Constraint::zero_mean: return "zero_mean";
  }
  return "?";
}

/// Scalar continuous Lagrange space of degree 1..3. Global numbering:
/// vertex nodes, then edge nodes (by global edge index, running from the
/// lower to the higher vertex index), then interior nodes; nodes on the
/// boundary are removed from the numbering under Constraint::zero_boundary.
/// Constraint::zero_mean keeps every node (it is imposed at system level).
class LagrangeSpace {
 public:
  LagrangeSpace(std::shared_ptr<const Mesh> mesh, int degree, Constraint constraint)
      : mesh_(std::move(mesh)), degree_(degree), constraint_(constraint) {
    if (!mesh_) throw ConfigError("LagrangeSpace requires a mesh");
    const ReferenceElement& ref = reference_element(degree);  // validates degree
    const EdgeTopology topo = build_edges(*mesh_);
    const int nv = static_cast<int>(mesh_->num_vertices());
    const int ne = static_cast<int>(topo.num_edges());
    const int nt = static_cast<int>(mesh_->num_triangles());
    const int per_edge = degree - 1;
    const int per_cell = interior_node_count(degree);
    const int full = nv + per_edge * ne + per_cell * nt;
    nloc_ = ref.size();

    std::vector<Point2> full_nodes(static_cast<std::size_t>(full));
    std::vector<char> on_boundary(static_cast<std::size_t>(full), 0);
    for (int v = 0; v < nv; ++v) full_nodes[v] = mesh_->vertices[v];
    for (int e = 0; e < ne; ++e) {
      const Point2 a = mesh_->vertices[topo.edges[e][0]], b = mesh_->vertices[topo.edges[e][1]];
      for (int j = 0; j < per_edge; ++j) {
        const double t = static_cast<double>(j + 1) / degree;
        full_nodes[nv + per_edge * e + j] = (1.0 - t) * a + t * b;
      }
    }
    {
      std::unordered_set<std::uint64_t> bnd;
      for (const auto& be : mesh_->boundary_edges) {
        bnd.insert(detail::edge_key(be[0], be[1]));
        on_boundary[be[0]] = on_boundary[be[1]] = 1;
      }
      for (int e = 0; e < ne; ++e)
        if (bnd.count(detail::edge_key(topo.edges[e][0], topo.edges[e][1])))
          for (int j = 0; j < per_edge; ++j) on_boundary[nv + per_edge * e + j] = 1;
    }

    std::vector<int> full_cell(static_cast<std::size_t>(nt) * nloc_);
    for (int t = 0; t < nt; ++t) {
      const auto& tri = mesh_->triangles[t];
      int* cell = &full_cell[static_cast<std::size_t>(t) * nloc_];
      int l = 0;
      for (int k = 0; k < 3; ++k) cell[l++] = tri[k];
      for (int k = 0; k < 3; ++k) {
        const int e = topo.triangle_edges[t][k];
        const bool forward = tri[k] == topo.edges[e][0];
        for (int j = 0; j < per_edge; ++j) cell[l++] = nv + per_edge * e + (forward ? j : per_edge - 1 - j);
      }
      for (int j = 0; j < per_cell; ++j) {
        const int id = nv + per_edge * ne + per_cell * t + j;
        cell[l++] = id;
        const AffineMap map = affine_map(*mesh_, t);
        full_nodes[id] = map.map(ref.nodes()[3 + 3 * per_edge + j]);
      }
    }

    std::vector<int> renumber(static_cast<std::size_t>(full), -1);
    for (int i = 0; i < full; ++i) {
      if (constraint_ == Constraint::zero_boundary && on_boundary[i]) continue;
      renumber[i] = static_cast<int>(nodes_.size());
      nodes_.push_back(full_nodes[i]);
      node_on_boundary_.push_back(on_boundary[i]);
    }
    cell_dofs_.resize(full_cell.size());
    for (std::size_t i = 0; i < full_cell.size(); ++i) cell_dofs_[i] = renumber[full_cell[i]];
    unconstrained_count_ = full;
  }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  Constraint constraint() const { return constraint_; }
  int dof_count() const { return static_cast<int>(nodes_.size()); }
  int unconstrained_count() const { return unconstrained_count_; }
  int local_size() const { return nloc_; }

  /// Global DOF of local node `l` of triangle `t`, or -1 if eliminated.
  int dof(std::size_t t, int l) const { return cell_dofs_[t * nloc_ + l]; }
  const int* cell(std::size_t t) const { return &cell_dofs_[t * nloc_]; }
  const std::vector<Point2>& nodes() const { return nodes_; }
  bool node_on_boundary(int d) const { return node_on_boundary_[d] != 0; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  Constraint constraint_;
  int nloc_ = 0;
  int unconstrained_count_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<Point2> nodes_;
  std::vector<char> node_on_boundary_;
};

inline LagrangeSpace build_space(std::shared_ptr<const Mesh> mesh, int degree, Constraint constraint) {
  return LagrangeSpace(std::move(mesh), degree, constraint);
}

// ---------------------------------------------------------------------------

/// Fields of the mixed formulation, in global vector order.
enum class Field { y = 0, phi1 = 1, phi2 = 2, u = 3, p = 4, sigma = 5, r = 6 };
inline constexpr int kFieldCount = 7;
inline constexpr std::array<Field, kFieldCount> kAllFields{Field::y,  Field::phi1,  Field::phi2, Field::u,
                                                           Field::p,  Field::sigma, Field::r};

inline std::string_view field_name(Field f) {
  static constexpr std::array<std::string_view, kFieldCount> names{"y", "phi1", "phi2", "u", "p", "sigma", "r"};
  return names[static_cast<int>(f)];
}

/// V_h^m = L^{m-1} x (L^m_0)^2 x L^m_0 x L^m x L^{sigma_degree} (zero mean) x L^m_0.
/// Global vectors are laid out [y | phi1 | phi2 | u | p | sigma | r] followed
/// by one scalar multiplier enforcing the zero mean of sigma, so the
/// assembled systems have size system_dim() = total_dim() + 1.
class ProductSpace {
 public:
  ProductSpace(std::shared_ptr<const Mesh> mesh, int m, int sigma_degree, int p_degree)
      : m_(m), sigma_degree_(sigma_degree), p_degree_(p_degree) {
    if (m < 2 || m > kMaxDegree) throw ConfigError("product space degree m must be 2 or 3, got " + std::to_string(m));
    if (sigma_degree != m - 1 && sigma_degree != m)
      throw ConfigError("sigma degree must be m-1 or m, got " + std::to_string(sigma_degree));
    if (p_degree != m - 1 && p_degree != m)
      throw ConfigError("p degree must be m-1 or m, got " + std::to_string(p_degree));
    y_ = std::make_shared<LagrangeSpace>(mesh, m - 1, Constraint::none);
    h0_ = std::make_shared<LagrangeSpace>(mesh, m, Constraint::zero_boundary);
    p_ = std::make_shared<LagrangeSpace>(mesh, p_degree, Constraint::none);
    sigma_ = std::make_shared<LagrangeSpace>(mesh, sigma_degree, Constraint::zero_mean);
    offsets_[0] = 0;
    for (int c = 0; c < kFieldCount; ++c) offsets_[c + 1] = offsets_[c] + space(kAllFields[c]).dof_count();
  }

  int degree() const { return m_; }
  int sigma_degree() const { return sigma_degree_; }
  int p_degree() const { return p_degree_; }
  const Mesh& mesh() const { return y_->mesh(); }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return y_->mesh_ptr(); }

  const LagrangeSpace& space(Field f) const {
    switch (f) {
      case Field::y: return *y_;
      case Field::p: return *p_;
      case Field::sigma: return *sigma_;
      default: return *h0_;
    }
  }
  int offset(Field f) const { return offsets_[static_cast<int>(f)]; }
  int dim(Field f) const { return space(f).dof_count(); }
  int total_dim() const { return offsets_[kFieldCount]; }
  int multiplier_index() const { return total_dim(); }
  int system_dim() const { return total_dim() + 1; }

  /// Component dimensions in field order.
  std::array<int, kFieldCount> component_dims() const {
    std::array<int, kFieldCount> d{};
    for (int c = 0; c < kFieldCount; ++c) d[c] = dim(kAllFields[c]);
    return d;
  }

 private:
  int m_;
  int sigma_degree_;
  int p_degree_;
  std::shared_ptr<LagrangeSpace> y_, h0_, p_, sigma_;
  std::array<int, kFieldCount + 1> offsets_{};
};

inline ProductSpace build_product_space(std::shared_ptr<const Mesh> mesh, int m, int sigma_degree, int p_degree) {
  return ProductSpace(std::move(mesh), m, sigma_degree, p_degree);
}

/// View of one field inside a global coefficient vector.
template <class Vec>
auto component(const ProductSpace& space, Vec&& v, Field f) {
  return v.segment(space.offset(f), space.dim(f));
}

// ---------------------------------------------------------------------------
// Point evaluation

namespace detail {

/// Triangle containing `p` (brute-force search) and its reference coordinates.
inline std::optional<std::pair<std::size_t, Point2>> locate(const Mesh& mesh, Point2 p, double tol = 1e-12) {
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const AffineMap map = affine_map(mesh, t);
    const Point2 ref = map.inverse(p);
    if (ref.x1 >= -tol && ref.x2 >= -tol && ref.x1 + ref.x2 <= 1.0 + tol) return std::pair{t, ref};
  }
  return std::nullopt;
}

}  // namespace detail

/// Value at `p` of the finite element function with the given coefficients.
template <class Scalar>
Scalar evaluate(const LagrangeSpace& space, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& coefficients, Point2 p) {
  if (coefficients.size() != space.dof_count()) throw ConfigError("coefficient vector length does not match space");
  const auto hit = detail::locate(space.mesh(), p);
  if (!hit) throw ConfigError("evaluation point (" + std::to_string(p.x1) + ", " + std::to_string(p.x2) +
                              ") lies outside the mesh");
  const ReferenceElement& ref = reference_element(space.degree());
  std::array<double, local_dof_count(kMaxDegree)> phi{};
  ref.values(hit->second, phi.data());
  Scalar value{0};
  for (int l = 0; l < ref.size(); ++l) {
    const int d = space.dof(hit->first, l);
    if (d >= 0) value += phi[l] * coefficients(d);
  }
  return value;
}

// ---------------------------------------------------------------------------
// Prolongation

/// Matrix mapping coefficients on `coarse` to the coefficients on `fine`
/// (whose mesh is refine_red of the coarse mesh) of the same function:
/// every fine node value is the coarse function evaluated there.
inline SparseMatrix prolongate(const LagrangeSpace& coarse, const LagrangeSpace& fine) {
  const Mesh& cm = coarse.mesh();
  const Mesh& fm = fine.mesh();
  if (coarse.degree() != fine.degree() || coarse.constraint() != fine.constraint())
    throw ConfigError("prolongation requires spaces of equal degree and constraint");
  if (!fm.parent || fm.parent->parent_triangle.size() != fm.num_triangles() ||
      fm.num_triangles() != 4 * cm.num_triangles() || fm.level != cm.level + 1)
    throw ConfigError("prolongation requires the fine mesh to be the red refinement of the coarse mesh");

  const ReferenceElement& ref = reference_element(coarse.degree());
  const int nloc = ref.size();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(fine.dof_count()) * 3);
  std::vector<char> done(static_cast<std::size_t>(fine.dof_count()), 0);
  std::array<double, local_dof_count(kMaxDegree)> phi{};
  for (std::size_t ft = 0; ft < fm.num_triangles(); ++ft) {
    const int ct = fm.parent->parent_triangle[ft];
    const AffineMap cmap = affine_map(cm, ct);
    for (int l = 0; l < nloc; ++l) {
      const int fd = fine.dof(ft, l);
      if (fd < 0 || done[fd]) continue;
      done[fd] = 1;
      const Point2 xr = cmap.inverse(fine.nodes()[fd]);
      int colocated = -1;
      for (int c = 0; c < nloc; ++c)
        if (std::abs(xr.x1 - ref.nodes()[c].x1) < 1e-12 && std::abs(xr.x2 - ref.nodes()[c].x2) < 1e-12) colocated = c;
      if (colocated >= 0) {
        const int cd = coarse.dof(ct, colocated);
        if (cd >= 0) trip.emplace_back(fd, cd, 1.0);
        continue;
      }
      ref.values(xr, phi.data());
      for (int c = 0; c < nloc; ++c) {
        const int cd = coarse.dof(ct, c);
        if (cd >= 0 && std::abs(phi[c]) > 1e-14) trip.emplace_back(fd, cd, phi[c]);
      }
    }
  }
  return from_triplets(fine.dof_count(), coarse.dof_count(), trip);
}

/// Block-diagonal prolongation of the product space, including the
/// zero-mean multiplier (mapped to itself).
inline SparseMatrix prolongate(const ProductSpace& coarse, const ProductSpace& fine) {
  if (coarse.degree() != fine.degree() || coarse.sigma_degree() != fine.sigma_degree() ||
      coarse.p_degree() != fine.p_degree())
    throw ConfigError("prolongation requires product spaces with the same m, sigma and p degrees");
  std::vector<Triplet> trip;
  for (Field f : kAllFields) {
    const SparseMatrix block = prolongate(coarse.space(f), fine.space(f));
    for (int r = 0; r < block.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(block, r); it; ++it)
        trip.emplace_back(fine.offset(f) + r, coarse.offset(f) + it.col(), it.value());
  }
  trip.emplace_back(fine.multiplier_index(), coarse.multiplier_index(), 1.0);
  return from_triplets(fine.system_dim(), coarse.system_dim(), trip);
}

}  // namespace teig
