#pragma once
// Generalized non-self-adjoint eigenproblem A x = lambda B x (B singular)
// by shift-invert Arnoldi with thick restart, plus the modulus/argument
// ordering of complex numbers used to list eigenvalues.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "teig/error.hpp"
#include "teig/linalg/dense.hpp"
#include "teig/linalg/lu.hpp"
#include "teig/linalg/sparse.hpp"

namespace teig {

// ---------------------------------------------------------------------------
// Ordering: c1 <= c2 iff both are zero, or |c1| < |c2|, or the moduli are
// equal and nonzero and arg c1 >= arg c2, with arguments taken in [0, 2pi).

/// Argument in [0, 2pi).
inline double argument_0_2pi(Complex c) {
  double t = std::atan2(c.imag(), c.real());
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  if (t >= 2.0 * std::numbers::pi) t = 0.0;
  return t;
}

/// True iff c1 precedes-or-equals c2.
inline bool eqslantless(Complex c1, Complex c2) {
  const double r1 = std::abs(c1), r2 = std::abs(c2);
  if (r1 == 0.0 && r2 == 0.0) return true;
  if (r1 < r2) return true;
  if (r1 == r2 && r1 != 0.0) return argument_0_2pi(c1) >= argument_0_2pi(c2);
  return false;
}

/// Three-way comparison under the ordering: negative if c1 strictly
/// precedes c2, zero if equivalent, positive otherwise.
inline int compare_eqslantless(Complex c1, Complex c2) {
  const bool le = eqslantless(c1, c2), ge = eqslantless(c2, c1);
  if (le && ge) return 0;
  return le ? -1 : 1;
}

/// Strict weak ordering for std::sort, ascending in the ordering.
struct SpectrumOrder {
  bool operator()(Complex a, Complex b) const { return compare_eqslantless(a, b) < 0; }
};

// ---------------------------------------------------------------------------

struct EigenPair {
  Complex lambda;
  ComplexVector vector;  // unit 2-norm, largest entry real positive
  double residual = 0.0;  // ||A x - lambda B x||_2 / ||x||_2
  bool converged = true;
};

/// ||A x - lambda B x|| / ||x|| in complex arithmetic via real products.
inline double residual(const SparseMatrix& a, const SparseMatrix& b, Complex lambda, const ComplexVector& x) {
  const double nx = x.norm();
  if (nx == 0.0) return 0.0;
  return (multiply(a, x) - lambda * multiply(b, x)).norm() / nx;
}

inline double residual(const SparseMatrix& a, const SparseMatrix& b, const EigenPair& pair) {
  return residual(a, b, pair.lambda, pair.vector);
}

/// Scales to unit norm and rotates the phase so the first entry of largest
/// modulus is real and positive. Conjugate inputs give conjugate outputs.
inline void normalize_eigenvector(ComplexVector& x) {
  const double nx = x.norm();
  if (nx == 0.0) return;
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) > best * (1.0 + 1e-12)) {
      best = std::abs(x(i));
      imax = i;
    }
  const Complex phase = std::conj(x(imax)) / std::abs(x(imax));
  x *= phase / nx;
  x(imax) = Complex(x(imax).real(), 0.0);
}

inline void sort_pairs(std::vector<EigenPair>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const EigenPair& a, const EigenPair& b) { return SpectrumOrder{}(a.lambda, b.lambda); });
}

/// Keeps the first k entries of a sorted list, extending it by one when the
/// k-th entry's complex conjugate would otherwise be cut off.
inline std::size_t cut_with_conjugates(const std::vector<Complex>& sorted, std::size_t k) {
  if (k >= sorted.size()) return sorted.size();
  const Complex last = sorted[k - 1];
  if (last.imag() != 0.0 && sorted[k] == std::conj(last)) return k + 1;
  return k;
}

// ---------------------------------------------------------------------------

struct ConjugateClosureReport {
  std::vector<std::string> violations;
  bool closed() const { return violations.empty(); }
};

/// Every non-real value must have a distinct partner within
/// tol * max(1, |lambda|) of its conjugate.
inline ConjugateClosureReport verify_conjugate_closure(const std::vector<Complex>& values, double tol) {
  ConjugateClosureReport report;
  std::vector<char> used(values.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Complex l = values[i];
    const double scale = tol * std::max(1.0, std::abs(l));
    if (std::abs(l.imag()) <= scale || used[i]) continue;
    std::size_t best = values.size();
    double best_d = scale;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (j == i || used[j]) continue;
      const double d = std::abs(values[j] - std::conj(l));
      if (d <= best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == values.size()) {
      report.violations.push_back("eigenvalue " + std::to_string(l.real()) + (l.imag() < 0 ? "" : "+") +
                                  std::to_string(l.imag()) + "i (index " + std::to_string(i) +
                                  ") has no conjugate partner");
    } else {
      used[i] = used[best] = 1;
    }
  }
  return report;
}

inline ConjugateClosureReport verify_conjugate_closure(const std::vector<EigenPair>& pairs, double tol) {
  std::vector<Complex> values;
  for (const auto& p : pairs) values.push_back(p.lambda);
  return verify_conjugate_closure(values, tol);
}

// ---------------------------------------------------------------------------
// Shift-invert Arnoldi

struct ArnoldiOptions {
  double shift = 0.5;
  int k = 6;
  double tol = 1e-10;
  int max_restart = 50;
  int krylov_dim = 0;        // 0: max(2k + 10, 30)
  int extra = 4;             // Ritz values tracked beyond k
  std::uint64_t seed = 20240531;
  double infinite_nu = 1e-10;     // |nu| below this is an infinite eigenvalue
  double max_abs_lambda = 1e6;    // larger |lambda| are not reported
};

struct ArnoldiResult {
  std::vector<EigenPair> pairs;  // ascending in the ordering
  bool converged = false;
  int restarts = 0;
  int operator_applications = 0;
};

namespace detail {

/// Deterministic uniform doubles in [-1, 1) from a splitmix64 stream.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : state_(seed) {}
  double next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-52 - 1.0;
  }
  Vector vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = next();
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace detail

/// Eigenpairs of A x = lambda B x nearest the shift, from the Krylov space of
/// (A - shift B)^{-1} B. Ritz values nu map back as lambda = shift + 1/nu.
/// Returns at least k pairs (k + 1 when a conjugate pair straddles the
/// cut) ascending in the ordering; if the iteration does not converge within
/// max_restart restarts the best pairs are returned with converged = false.
inline ArnoldiResult shift_invert_arnoldi(const SparseMatrix& a, const SparseMatrix& b, const ArnoldiOptions& opt) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw ConfigError("shift_invert_arnoldi: A and B must be square and of equal size");
  if (opt.k < 1) throw ConfigError("shift_invert_arnoldi: k must be >= 1");
  const Eigen::Index n = a.rows();
  if (n < 2) throw ConfigError("shift_invert_arnoldi: problem dimension must be >= 2");

  const SparseMatrix shifted = (a - opt.shift * b).pruned();
  std::optional<LUFactorization> lu;
  try {
    lu.emplace(shifted);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(std::string("A - shift*B is singular for shift = ") + std::to_string(opt.shift) +
                              "; perturb the shift (" + e.what() + ")");
  }

  ArnoldiResult result;
  auto op = [&](const Vector& x) {
    ++result.operator_applications;
    return lu->solve(Vector(b * x));
  };

  const int kd = static_cast<int>(std::min<Eigen::Index>(opt.krylov_dim > 0 ? opt.krylov_dim : std::max(2 * opt.k + 10, 30), n));
  const int nev = std::max(1, std::min(opt.k + opt.extra, kd - 3));

  DenseMatrix v = DenseMatrix::Zero(n, kd + 1);
  DenseMatrix h = DenseMatrix::Zero(kd + 1, kd);
  detail::SeededStream rng(opt.seed);

  // Start vector: two applications of the operator remove components along
  // the infinite eigenvalues of the singular pencil.
  Vector v0 = op(op(rng.vector(n)));
  if (v0.norm() == 0.0) throw SolverError("shift_invert_arnoldi: operator annihilates the start vector (B = 0?)");
  v.col(0) = v0 / v0.norm();
  int p = 0;  // columns kept from the previous cycle

  std::vector<EigenPair> best;
  for (int restart = 0;; ++restart) {
    result.restarts = restart;
    for (int j = p; j < kd; ++j) {
      Vector w = op(v.col(j));
      const double wnorm0 = w.norm();
      const Vector coeffs = orthogonalize(v, j + 1, w);
      h.col(j).head(j + 1) = coeffs;
      double beta = w.norm();
      if (beta <= 1e-12 * std::max(wnorm0, 1e-300)) {
        // Invariant subspace: continue with a fresh direction.
        Vector r = rng.vector(n);
        orthogonalize(v, j + 1, r);
        w = r;
        beta = 0.0;
      }
      h(j + 1, j) = beta;
      v.col(j + 1) = w / w.norm();
    }

    const DenseMatrix hm = h.topRows(kd);
    const Eigen::RowVectorXd brow = h.row(kd);
    const DenseEigen eig = dense_eig(hm, true);

    // Wanted Ritz values: largest |nu|, conjugate pairs kept together.
    std::vector<int> order(eig.values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return std::abs(eig.values[x]) > std::abs(eig.values[y]); });
    std::vector<int> wanted;
    for (int idx : order) {
      const Complex nu = eig.values[idx];
      if (std::abs(nu) < opt.infinite_nu) continue;
      if (static_cast<int>(wanted.size()) >= nev) {
        // Complete a conjugate pair that was split by the cut.
        const Complex last = eig.values[wanted.back()];
        if (!(last.imag() != 0.0 && nu == std::conj(last))) break;
      }
      wanted.push_back(idx);
    }

    // Residual estimates for the operator: |b . s| relative to |nu|.
    bool ritz_converged = !wanted.empty();
    for (int idx : wanted) {
      const Complex est = brow.cast<Complex>() * eig.vectors.col(idx);
      if (std::abs(est) > opt.tol * 1e-2 * std::abs(eig.values[idx])) ritz_converged = false;
    }

    const bool last_cycle = restart >= opt.max_restart;
    if (ritz_converged || last_cycle) {
      // Purify, normalize and check the true residuals of the first k in order.
      std::vector<EigenPair> pairs;
      for (int idx : wanted) {
        const Complex nu = eig.values[idx];
        const Complex lambda = opt.shift + 1.0 / nu;
        if (std::abs(lambda) > opt.max_abs_lambda) continue;
        ComplexVector x = v.leftCols(kd).cast<Complex>() * eig.vectors.col(idx);
        ComplexVector px(n);
        px.real() = op(x.real());
        px.imag() = op(x.imag());
        x = px / nu;
        normalize_eigenvector(x);
        EigenPair pair{lambda, std::move(x), 0.0, true};
        pair.residual = residual(a, b, pair);
        pairs.push_back(std::move(pair));
      }
      sort_pairs(pairs);
      std::vector<Complex> lambdas;
      for (const auto& pr : pairs) lambdas.push_back(pr.lambda);
      const std::size_t keep = cut_with_conjugates(lambdas, static_cast<std::size_t>(opt.k));
      pairs.resize(std::min(keep, pairs.size()));
      bool all_ok = pairs.size() >= static_cast<std::size_t>(opt.k);
      for (auto& pr : pairs) {
        pr.converged = pr.residual <= opt.tol;
        all_ok = all_ok && pr.converged;
      }
      best = std::move(pairs);
      if (all_ok) {
        result.converged = true;
        break;
      }
      if (last_cycle) break;
    }

    // Thick restart: keep an orthonormal real basis of the wanted invariant
    // subspace of H (real and imaginary parts of its eigenvectors).
    DenseMatrix s(kd, 0);
    {
      DenseMatrix cols(kd, 2 * static_cast<int>(wanted.size()));
      int c = 0;
      for (int idx : wanted) {
        const Complex nu = eig.values[idx];
        if (nu.imag() < 0.0) continue;  // partner contributes the same span
        cols.col(c++) = eig.vectors.col(idx).real();
        if (nu.imag() > 0.0) cols.col(c++) = eig.vectors.col(idx).imag();
      }
      s = orthonormalize_columns(cols.leftCols(c), 1e-10);
    }
    p = static_cast<int>(s.cols());
    if (p >= kd - 1) p = kd - 2;
    s.conservativeResize(Eigen::NoChange, p);
    const DenseMatrix t = s.transpose() * hm * s;
    const Eigen::RowVectorXd bs = brow * s;
    const DenseMatrix kept = v.leftCols(kd) * s;
    const Vector next = v.col(kd);
    v.setZero();
    h.setZero();
    v.leftCols(p) = kept;
    v.col(p) = next;
    h.topLeftCorner(p, p) = t;
    h.row(p).head(p) = bs;
  }
  result.pairs = std::move(best);
  return result;
}

}  // namespace teig
