#pragma once
// Reference-triangle Lagrange shape functions of degree 1..3 and
// collapsed-Gauss quadrature on the reference triangle (0,0),(1,0),(0,1).

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include "teig/error.hpp"
#include "teig/mesh.hpp"

namespace teig {

inline constexpr int kMaxDegree = 3;

/// Number of shape functions of the degree-m Lagrange triangle.
constexpr int local_dof_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Number of interior (non-vertex, non-edge) nodes of the degree-m triangle.
constexpr int interior_node_count(int degree) { return degree >= 3 ? (degree - 1) * (degree - 2) / 2 : 0; }

/// Nodal basis on the reference triangle. Local node order: the three
/// vertices, then m-1 nodes on each local edge l (vertex l -> vertex l+1),
/// then interior nodes.
class ReferenceElement {
 public:
  explicit ReferenceElement(int degree) : degree_(degree) {
    if (degree < 1 || degree > kMaxDegree)
      throw ConfigError("unsupported Lagrange degree " + std::to_string(degree) + " (supported: 1..3)");
    const int n = local_dof_count(degree);
    const std::array<Point2, 3> corner{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
    for (const auto& c : corner) nodes_.push_back(c);
    for (int l = 0; l < 3; ++l)
      for (int j = 1; j < degree; ++j) {
        const double t = static_cast<double>(j) / degree;
        nodes_.push_back((1.0 - t) * corner[l] + t * corner[(l + 1) % 3]);
      }
    for (int j = 1; j < degree; ++j)
      for (int i = 1; i + j < degree; ++i)
        nodes_.push_back({static_cast<double>(i) / degree, static_cast<double>(j) / degree});

    for (int total = 0; total <= degree; ++total)
      for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});

    Eigen::MatrixXd vandermonde(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) vandermonde(i, k) = monomial(k, nodes_[i]);
    coefficients_ = vandermonde.inverse();  // column i: monomial coefficients of shape function i
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point2>& nodes() const { return nodes_; }

  void values(Point2 ref, double* out) const {
    Eigen::VectorXd mono(size());
    for (int k = 0; k < size(); ++k) mono(k) = monomial(k, ref);
    Eigen::Map<Eigen::VectorXd>(out, size()) = coefficients_.transpose() * mono;
  }

  /// Reference gradients: out[2*i] = dN_i/dxi, out[2*i+1] = dN_i/deta.
  void gradients(Point2 ref, double* out) const {
    Eigen::VectorXd dx(size()), dy(size());
    for (int k = 0; k < size(); ++k) {
      const auto [a, b] = exponents_[k];
      dx(k) = a == 0 ? 0.0 : a * ipow(ref.x1, a - 1) * ipow(ref.x2, b);
      dy(k) = b == 0 ? 0.0 : b * ipow(ref.x1, a) * ipow(ref.x2, b - 1);
    }
    const Eigen::VectorXd gx = coefficients_.transpose() * dx;
    const Eigen::VectorXd gy = coefficients_.transpose() * dy;
    for (int i = 0; i < size(); ++i) {
      out[2 * i] = gx(i);
      out[2 * i + 1] = gy(i);
    }
  }

 private:
  static double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
  }
  double monomial(int k, Point2 p) const { return ipow(p.x1, exponents_[k][0]) * ipow(p.x2, exponents_[k][1]); }

  int degree_;
  std::vector<Point2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coefficients_;
};

inline const ReferenceElement& reference_element(int degree) {
  static const std::array<ReferenceElement, kMaxDegree> elements{ReferenceElement(1), ReferenceElement(2),
                                                                 ReferenceElement(3)};
  if (degree < 1 || degree > kMaxDegree)
    throw ConfigError("unsupported Lagrange degree " + std::to_string(degree) + " (supported: 1..3)");
  return elements[degree - 1];
}

struct QuadratureRule {
  std::vector<std::array<double, 3>> barycentric;  // (1-xi-eta, xi, eta)
  std::vector<double> weights;                     // sum to 1/2, the reference area
  int exactness = 0;

  std::size_t size() const { return weights.size(); }
  Point2 point(std::size_t q) const { return {barycentric[q][1], barycentric[q][2]}; }
};

/// Conical product (collapsed Gauss-Legendre) rule exact for all polynomials
/// of total degree <= `degree`.
inline QuadratureRule make_quadrature(int degree) {
  if (degree < 0) throw ConfigError("quadrature degree must be non-negative");
  const unsigned n = static_cast<unsigned>((degree + 3) / 2);  // 2n-2 >= degree
  std::vector<double> x, w;
  {
    const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
    for (double z : zeros) {
      const double dp = boost::math::legendre_p_prime(static_cast<int>(n), z);
      const double wz = 2.0 / ((1.0 - z * z) * dp * dp);
      x.push_back(z);
      w.push_back(wz);
      if (z != 0.0) {
        x.push_back(-z);
        w.push_back(wz);
      }
    }
  }
  QuadratureRule rule;
  rule.exactness = static_cast<int>(2 * n - 2);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double u = 0.5 * (x[i] + 1.0), v = 0.5 * (x[j] + 1.0);
      const double xi = u, eta = (1.0 - u) * v;
      rule.barycentric.push_back({1.0 - xi - eta, xi, eta});
      rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - u));
    }
  return rule;
}

/// Affine map from the reference triangle onto a mesh triangle.
struct AffineMap {
  Point2 origin;
  double j11, j12, j21, j22;  // columns: v1 - v0, v2 - v0
  double det;

  AffineMap(Point2 v0, Point2 v1, Point2 v2)
      : origin(v0), j11(v1.x1 - v0.x1), j12(v2.x1 - v0.x1), j21(v1.x2 - v0.x2), j22(v2.x2 - v0.x2) {
    det = j11 * j22 - j12 * j21;
  }

  Point2 map(Point2 ref) const {
    return {origin.x1 + j11 * ref.x1 + j12 * ref.x2, origin.x2 + j21 * ref.x1 + j22 * ref.x2};
  }

  Point2 inverse(Point2 x) const {
    const double dx = x.x1 - origin.x1, dy = x.x2 - origin.x2;
    return {(j22 * dx - j12 * dy) / det, (-j21 * dx + j11 * dy) / det};
  }

  /// Physical gradient from a reference gradient: J^{-T} g.
  Point2 gradient(double gxi, double geta) const {
    return {(j22 * gxi - j21 * geta) / det, (-j12 * gxi + j11 * geta) / det};
  }
};

inline AffineMap affine_map(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  return AffineMap(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
}

}  // namespace teig
