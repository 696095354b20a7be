#pragma once
// Global matrices of the mixed transmission eigenproblem A x = lambda B x
// over a ProductSpace, plus scalar Gram matrices for error norms.
//
// Row = test function, column = trial function. With unknowns
// (y, phi, u, p, sigma, r) and tests (z, psi, v, q, tau, s), Case I uses
//
//   a((y,phi,u,p,sigma,r),(z,psi,v,q,tau,s)) =
//       ((1+a)y,z) + (a div phi,z) - (p,z) + (a y,div psi) + (a div phi,div psi)
//     + (rot phi,rot psi) + (sigma,rot psi) - (grad r,psi) + (grad r,grad v)
//     - (y,q) + (rot phi,tau) - (phi,grad s) + (grad u,grad s)
//
// with a = 1/(n-1); Case II replaces the first, second, fourth and fifth
// weights by b, b, b, 1+b with b = n/(1-n). The right-hand side is
//
//   b(...) = (phi,grad v) - (p,v) - (u,q).
//
// rot phi = d(phi2)/dx1 - d(phi1)/dx2. The zero mean of sigma is imposed by
// one bordering row/column (the last index of the system).

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "teig/coefficient.hpp"
#include "teig/error.hpp"
#include "teig/fespace.hpp"
#include "teig/lagrange.hpp"
#include "teig/linalg/sparse.hpp"

namespace teig {

/// Pointwise weights of the (y,z), (y,div psi)/(div phi,z) and
/// (div phi,div psi) terms for the chosen case.
struct CaseWeights {
  double yy, yd, dd;
};

inline CaseWeights case_weights(const CaseSelector& c, double n, Point2 where) {
  if (c.which == Case::I) {
    if (!(n > 1.0))
      throw ConfigError("n(x) = " + std::to_string(n) + " at (" + std::to_string(where.x1) + ", " +
                        std::to_string(where.x2) + ") is not > 1 as Case I requires");
    const double alpha = 1.0 / (n - 1.0);
    return {1.0 + alpha, alpha, alpha};
  }
  if (!(n > 0.0 && n < 1.0))
    throw ConfigError("n(x) = " + std::to_string(n) + " at (" + std::to_string(where.x1) + ", " +
                      std::to_string(where.x2) + ") is not in (0,1) as Case II requires");
  const double beta = n / (1.0 - n);
  return {beta, beta, 1.0 + beta};
}

namespace detail {

/// Shape values and reference gradients of one degree at every point of a
/// quadrature rule.
struct Tabulation {
  int n = 0;
  std::vector<double> values;     // [q * n + i]
  std::vector<double> gradients;  // [(q * n + i) * 2 + d]

  Tabulation(int degree, const QuadratureRule& rule) {
    const ReferenceElement& ref = reference_element(degree);
    n = ref.size();
    values.resize(rule.size() * n);
    gradients.resize(rule.size() * n * 2);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      ref.values(rule.point(q), &values[q * n]);
      ref.gradients(rule.point(q), &gradients[q * n * 2]);
    }
  }
};

/// Physical shape data of one space on one element at one quadrature point.
struct ShapeAt {
  int n = 0;
  std::array<double, local_dof_count(kMaxDegree)> v{};
  std::array<Point2, local_dof_count(kMaxDegree)> g{};

  void fill(const Tabulation& tab, std::size_t q, const AffineMap& map) {
    n = tab.n;
    for (int i = 0; i < n; ++i) {
      v[i] = tab.values[q * n + i];
      g[i] = map.gradient(tab.gradients[(q * n + i) * 2], tab.gradients[(q * n + i) * 2 + 1]);
    }
  }
};

inline double dot(Point2 a, Point2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }

/// Dense element block accumulator with global scatter.
class ElementBlock {
 public:
  ElementBlock(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  void clear() { std::fill(data_.begin(), data_.end(), 0.0); }

  void scatter(const int* row_dofs, int row_offset, const int* col_dofs, int col_offset,
               std::vector<Triplet>& out) const {
    for (int i = 0; i < rows_; ++i) {
      if (row_dofs[i] < 0) continue;
      for (int j = 0; j < cols_; ++j) {
        const double value = data_[static_cast<std::size_t>(i) * cols_ + j];
        if (col_dofs[j] < 0 || value == 0.0) continue;
        out.emplace_back(row_offset + row_dofs[i], col_offset + col_dofs[j], value);
      }
    }
  }

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

}  // namespace detail

inline int assembly_quadrature_degree(const ProductSpace& space) { return 2 * space.degree() + 2; }

/// Assembles the system matrix of a_alpha (Case I) or a_beta (Case II),
/// size system_dim() x system_dim(), bordered by the sigma mean constraint.
inline SparseMatrix assemble_A(const ProductSpace& space, const Coefficient& n, const CaseSelector& c) {
  using detail::ElementBlock;
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = make_quadrature(assembly_quadrature_degree(space));
  const detail::Tabulation tab_y(space.degree() - 1, rule), tab_m(space.degree(), rule),
      tab_s(space.sigma_degree(), rule), tab_p(space.p_degree(), rule);
  const int ny = tab_y.n, nm = tab_m.n, ns = tab_s.n, np = tab_p.n;

  const int oy = space.offset(Field::y), o1 = space.offset(Field::phi1), o2 = space.offset(Field::phi2),
            ou = space.offset(Field::u), op = space.offset(Field::p), os = space.offset(Field::sigma),
            orr = space.offset(Field::r), omult = space.multiplier_index();
  const LagrangeSpace& sy = space.space(Field::y);
  const LagrangeSpace& sh = space.space(Field::u);  // shared by phi1, phi2, u, r
  const LagrangeSpace& sp = space.space(Field::p);
  const LagrangeSpace& ss = space.space(Field::sigma);

  // Element blocks, named test_trial.
  ElementBlock z_y(ny, ny), z_p(ny, np), q_y(np, ny);
  std::array<ElementBlock, 2> z_phi{ElementBlock(ny, nm), ElementBlock(ny, nm)};
  std::array<ElementBlock, 2> psi_y{ElementBlock(nm, ny), ElementBlock(nm, ny)};
  std::array<std::array<ElementBlock, 2>, 2> psi_phi{
      {{ElementBlock(nm, nm), ElementBlock(nm, nm)}, {ElementBlock(nm, nm), ElementBlock(nm, nm)}}};
  std::array<ElementBlock, 2> psi_sigma{ElementBlock(nm, ns), ElementBlock(nm, ns)};
  std::array<ElementBlock, 2> psi_r{ElementBlock(nm, nm), ElementBlock(nm, nm)};
  std::array<ElementBlock, 2> tau_phi{ElementBlock(ns, nm), ElementBlock(ns, nm)};
  std::array<ElementBlock, 2> s_phi{ElementBlock(nm, nm), ElementBlock(nm, nm)};
  ElementBlock stiff(nm, nm);  // (grad r, grad v) and (grad u, grad s)
  std::vector<double> sigma_mean(static_cast<std::size_t>(ns));

  std::vector<Triplet> trip;
  detail::ShapeAt Y, M, S, Pq;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const AffineMap map = affine_map(mesh, t);
    const double jac = std::abs(map.det);
    for (auto* b : {&z_y, &z_p, &q_y, &stiff}) b->clear();
    for (int a = 0; a < 2; ++a) {
      for (auto* b : {&z_phi[a], &psi_y[a], &psi_sigma[a], &psi_r[a], &tau_phi[a], &s_phi[a]}) b->clear();
      for (int b = 0; b < 2; ++b) psi_phi[a][b].clear();
    }
    std::fill(sigma_mean.begin(), sigma_mean.end(), 0.0);

    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jac;
      const Point2 x = map.map(rule.point(q));
      const CaseWeights cw = case_weights(c, n(x), x);
      Y.fill(tab_y, q, map);
      M.fill(tab_m, q, map);
      S.fill(tab_s, q, map);
      Pq.fill(tab_p, q, map);
      // div/rot of the vector basis N e_a: div = dN/dx_a, rot(N e1) = -dN/dx2, rot(N e2) = dN/dx1.
      auto div = [&](int a, int i) { return a == 0 ? M.g[i].x1 : M.g[i].x2; };
      auto rot = [&](int a, int i) { return a == 0 ? -M.g[i].x2 : M.g[i].x1; };
      auto dcomp = [](Point2 g, int a) { return a == 0 ? g.x1 : g.x2; };

      for (int i = 0; i < ny; ++i) {
        for (int j = 0; j < ny; ++j) z_y(i, j) += w * cw.yy * Y.v[i] * Y.v[j];
        for (int j = 0; j < np; ++j) {
          z_p(i, j) -= w * Y.v[i] * Pq.v[j];
          q_y(j, i) -= w * Pq.v[j] * Y.v[i];
        }
        for (int j = 0; j < nm; ++j) {
          for (int a = 0; a < 2; ++a) {
            z_phi[a](i, j) += w * cw.yd * Y.v[i] * div(a, j);
            psi_y[a](j, i) += w * cw.yd * div(a, j) * Y.v[i];
          }
        }
      }
      for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < nm; ++j) {
          stiff(i, j) += w * detail::dot(M.g[i], M.g[j]);
          for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b)
              psi_phi[a][b](i, j) += w * (cw.dd * div(a, i) * div(b, j) + rot(a, i) * rot(b, j));
            psi_r[a](i, j) -= w * M.v[i] * dcomp(M.g[j], a);
            s_phi[a](i, j) -= w * M.v[j] * dcomp(M.g[i], a);
          }
        }
        for (int j = 0; j < ns; ++j)
          for (int a = 0; a < 2; ++a) {
            psi_sigma[a](i, j) += w * rot(a, i) * S.v[j];
            tau_phi[a](j, i) += w * S.v[j] * rot(a, i);
          }
      }
      for (int j = 0; j < ns; ++j) sigma_mean[j] += w * S.v[j];
    }

    const int* dy = sy.cell(t);
    const int* dh = sh.cell(t);
    const int* dp = sp.cell(t);
    const int* ds = ss.cell(t);
    const std::array<int, 2> ophi{o1, o2};
    z_y.scatter(dy, oy, dy, oy, trip);
    z_p.scatter(dy, oy, dp, op, trip);
    q_y.scatter(dp, op, dy, oy, trip);
    stiff.scatter(dh, ou, dh, orr, trip);  // (grad r, grad v): test v (u rows), trial r
    stiff.scatter(dh, orr, dh, ou, trip);  // (grad u, grad s): test s (r rows), trial u
    for (int a = 0; a < 2; ++a) {
      z_phi[a].scatter(dy, oy, dh, ophi[a], trip);
      psi_y[a].scatter(dh, ophi[a], dy, oy, trip);
      for (int b = 0; b < 2; ++b) psi_phi[a][b].scatter(dh, ophi[a], dh, ophi[b], trip);
      psi_sigma[a].scatter(dh, ophi[a], ds, os, trip);
      psi_r[a].scatter(dh, ophi[a], dh, orr, trip);
      tau_phi[a].scatter(ds, os, dh, ophi[a], trip);
      s_phi[a].scatter(dh, orr, dh, ophi[a], trip);
    }
    for (int j = 0; j < ns; ++j) {
      if (ds[j] < 0) continue;
      trip.emplace_back(omult, os + ds[j], sigma_mean[j]);
      trip.emplace_back(os + ds[j], omult, sigma_mean[j]);
    }
  }
  return from_triplets(space.system_dim(), space.system_dim(), trip);
}

/// Assembles b((y,phi,u,p,sigma,r),(z,psi,v,q,tau,s)) = (phi,grad v) - (p,v) - (u,q).
inline SparseMatrix assemble_B(const ProductSpace& space) {
  using detail::ElementBlock;
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = make_quadrature(assembly_quadrature_degree(space));
  const detail::Tabulation tab_m(space.degree(), rule), tab_p(space.p_degree(), rule);
  const int nm = tab_m.n, np = tab_p.n;
  const LagrangeSpace& sh = space.space(Field::u);
  const LagrangeSpace& sp = space.space(Field::p);
  const int o1 = space.offset(Field::phi1), o2 = space.offset(Field::phi2), ou = space.offset(Field::u),
            op = space.offset(Field::p);

  std::array<ElementBlock, 2> v_phi{ElementBlock(nm, nm), ElementBlock(nm, nm)};
  ElementBlock v_p(nm, np), q_u(np, nm);
  std::vector<Triplet> trip;
  detail::ShapeAt M, Pq;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const AffineMap map = affine_map(mesh, t);
    const double jac = std::abs(map.det);
    for (auto* b : {&v_phi[0], &v_phi[1], &v_p, &q_u}) b->clear();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jac;
      M.fill(tab_m, q, map);
      Pq.fill(tab_p, q, map);
      for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < nm; ++j) {
          v_phi[0](i, j) += w * M.v[j] * M.g[i].x1;
          v_phi[1](i, j) += w * M.v[j] * M.g[i].x2;
        }
        for (int j = 0; j < np; ++j) {
          v_p(i, j) -= w * M.v[i] * Pq.v[j];
          q_u(j, i) -= w * Pq.v[j] * M.v[i];
        }
      }
    }
    const int* dh = sh.cell(t);
    const int* dp = sp.cell(t);
    v_phi[0].scatter(dh, ou, dh, o1, trip);
    v_phi[1].scatter(dh, ou, dh, o2, trip);
    v_p.scatter(dh, ou, dp, op, trip);  // -(p, v)
    q_u.scatter(dp, op, dh, ou, trip);  // -(u, q)
  }
  return from_triplets(space.system_dim(), space.system_dim(), trip);
}

enum class GramNorm { L2, H1semi };

/// Mass (L2) or stiffness (H1 seminorm) matrix of a scalar space.
inline SparseMatrix assemble_gram(const LagrangeSpace& space, GramNorm norm) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = make_quadrature(2 * space.degree());
  const detail::Tabulation tab(space.degree(), rule);
  const int n = tab.n;
  detail::ElementBlock block(n, n);
  std::vector<Triplet> trip;
  detail::ShapeAt S;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const AffineMap map = affine_map(mesh, t);
    const double jac = std::abs(map.det);
    block.clear();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jac;
      S.fill(tab, q, map);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          block(i, j) += w * (norm == GramNorm::L2 ? S.v[i] * S.v[j] : detail::dot(S.g[i], S.g[j]));
    }
    block.scatter(space.cell(t), 0, space.cell(t), 0, trip);
  }
  return from_triplets(space.dof_count(), space.dof_count(), trip);
}

/// Gram matrices of (div phi, div psi) and (rot phi, rot psi) on the
/// stacked [phi1 | phi2] block.
struct PhiGrams {
  SparseMatrix div;
  SparseMatrix rot;
};

inline PhiGrams assemble_phi_grams(const ProductSpace& space) {
  const Mesh& mesh = space.mesh();
  const LagrangeSpace& sh = space.space(Field::phi1);
  const int nphi = sh.dof_count();
  const QuadratureRule rule = make_quadrature(2 * space.degree());
  const detail::Tabulation tab(space.degree(), rule);
  const int n = tab.n;
  std::array<std::array<detail::ElementBlock, 2>, 2> dblk{
      {{detail::ElementBlock(n, n), detail::ElementBlock(n, n)}, {detail::ElementBlock(n, n), detail::ElementBlock(n, n)}}};
  auto rblk = dblk;
  std::vector<Triplet> td, tr;
  detail::ShapeAt M;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const AffineMap map = affine_map(mesh, t);
    const double jac = std::abs(map.det);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        dblk[a][b].clear();
        rblk[a][b].clear();
      }
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jac;
      M.fill(tab, q, map);
      auto div = [&](int a, int i) { return a == 0 ? M.g[i].x1 : M.g[i].x2; };
      auto rot = [&](int a, int i) { return a == 0 ? -M.g[i].x2 : M.g[i].x1; };
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              dblk[a][b](i, j) += w * div(a, i) * div(b, j);
              rblk[a][b](i, j) += w * rot(a, i) * rot(b, j);
            }
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        dblk[a][b].scatter(sh.cell(t), a * nphi, sh.cell(t), b * nphi, td);
        rblk[a][b].scatter(sh.cell(t), a * nphi, sh.cell(t), b * nphi, tr);
      }
  }
  return {from_triplets(2 * nphi, 2 * nphi, td), from_triplets(2 * nphi, 2 * nphi, tr)};
}

/// Copies the sub-block [r0, r0+nr) x [c0, c0+nc) of a sparse matrix.
inline SparseMatrix extract_block(const SparseMatrix& a, int r0, int nr, int c0, int nc) {
  std::vector<Triplet> trip;
  for (int r = r0; r < r0 + nr; ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it)
      if (it.col() >= c0 && it.col() < c0 + nc) trip.emplace_back(r - r0, it.col() - c0, it.value());
  return from_triplets(nr, nc, trip);
}

/// L2 and H1-seminorms of one field of a coefficient vector.
struct ComponentNorm {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1() const { return std::hypot(l2, h1_semi); }
};

/// Per-field L2 and H1 seminorms, computed with the Gram matrices of each
/// component space. Accepts real or complex system or total-length vectors.
template <class Vec>
std::array<ComponentNorm, kFieldCount> component_norms(const ProductSpace& space, const Vec& v) {
  if (v.size() != space.total_dim() && v.size() != space.system_dim())
    throw ConfigError("vector length does not match the product space");
  std::array<ComponentNorm, kFieldCount> out{};
  for (Field f : kAllFields) {
    const LagrangeSpace& s = space.space(f);
    const SparseMatrix mass = assemble_gram(s, GramNorm::L2);
    const SparseMatrix stiff = assemble_gram(s, GramNorm::H1semi);
    const ComplexVector c = component(space, v, f).template cast<Complex>();
    const double l2 = std::real(c.dot(multiply(mass, c)));
    const double h1 = std::real(c.dot(multiply(stiff, c)));
    out[static_cast<int>(f)] = {std::sqrt(std::max(0.0, l2)), std::sqrt(std::max(0.0, h1))};
  }
  return out;
}

}  // namespace teig
