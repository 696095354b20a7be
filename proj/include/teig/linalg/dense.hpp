#pragma once
// Dense non-symmetric eigen-decomposition and vector kernels.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "teig/error.hpp"
#include "teig/linalg/sparse.hpp"

namespace teig {

struct DenseEigen {
  std::vector<Complex> values;  // complex conjugate pairs are adjacent
  ComplexMatrix vectors;        // column i belongs to values[i]; empty if not requested
};

/// Eigenvalues (and optionally eigenvectors) of a real square matrix:
/// Hessenberg reduction followed by Francis double-shift QR, at most 40
/// sweeps per eigenvalue.
inline DenseEigen dense_eig(const DenseMatrix& m, bool with_vectors = true) {
  if (m.rows() != m.cols()) throw ConfigError("dense_eig needs a square matrix");
  DenseEigen out;
  if (m.rows() == 0) return out;
  if (!m.allFinite()) throw SolverError("dense_eig: matrix has non-finite entries");
  Eigen::EigenSolver<DenseMatrix> solver;
  solver.setMaxIterations(40 * m.rows());  // Eigen caps the total sweep count
  solver.compute(m, with_vectors);
  if (solver.info() != Eigen::Success)
    throw SolverError("dense_eig: QR iteration did not converge within 40 sweeps per eigenvalue on the " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " Hessenberg matrix");
  const auto& ev = solver.eigenvalues();
  out.values.assign(ev.data(), ev.data() + ev.size());
  if (with_vectors) out.vectors = solver.eigenvectors();
  // Complex eigenvalues come from 2x2 Schur blocks; emit each pair as exact
  // mirror images.
  for (std::size_t i = 0; i + 1 < out.values.size(); ++i) {
    if (out.values[i].imag() == 0.0) continue;
    out.values[i + 1] = std::conj(out.values[i]);
    if (with_vectors) out.vectors.col(static_cast<Eigen::Index>(i + 1)) = out.vectors.col(static_cast<Eigen::Index>(i)).conjugate();
    ++i;
  }
  return out;
}

/// Orthogonalizes `w` against the first `ncols` (orthonormal) columns of
/// `basis` with modified Gram-Schmidt, repeating the pass while the
/// remaining loss of orthogonality exceeds 1e-8 (at most two extra passes).
/// Returns the accumulated coefficients; `w` is modified in place.
inline Vector orthogonalize(const DenseMatrix& basis, int ncols, Vector& w) {
  Vector coeffs = Vector::Zero(ncols);
  for (int pass = 0; pass < 3; ++pass) {
    for (int j = 0; j < ncols; ++j) {
      const double h = basis.col(j).dot(w);
      coeffs(j) += h;
      w.noalias() -= h * basis.col(j);
    }
    const double nw = w.norm();
    if (nw == 0.0 || ncols == 0) break;
    const double loss = (basis.leftCols(ncols).transpose() * w).cwiseAbs().maxCoeff() / nw;
    if (loss <= 1e-8) break;
  }
  return coeffs;
}

/// Modified Gram-Schmidt on the columns of `m`; columns whose norm after
/// orthogonalization falls below `drop_tol` times their original norm are
/// removed. Returns the orthonormal basis and fills `kept` with the indices
/// of the surviving input columns.
inline DenseMatrix orthonormalize_columns(const DenseMatrix& m, double drop_tol, std::vector<int>* kept = nullptr) {
  DenseMatrix q(m.rows(), m.cols());
  int r = 0;
  if (kept) kept->clear();
  for (int j = 0; j < m.cols(); ++j) {
    Vector w = m.col(j);
    const double before = w.norm();
    if (before == 0.0) continue;
    orthogonalize(q, r, w);
    const double after = w.norm();
    if (after <= drop_tol * before) continue;
    q.col(r++) = w / after;
    if (kept) kept->push_back(j);
  }
  return q.leftCols(r);
}

}  // namespace teig
