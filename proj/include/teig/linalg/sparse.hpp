#pragma once

#include <complex>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "teig/error.hpp"

namespace teig {

/// Compressed sparse row matrix; column indices are sorted and unique per
/// row once compressed.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Builds a compressed matrix from coordinate triplets, summing duplicates.
inline SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

/// Real sparse matrix times a complex vector, via two real products.
inline ComplexVector multiply(const SparseMatrix& a, const ComplexVector& x) {
  const Vector re = a * x.real();
  const Vector im = a * x.imag();
  ComplexVector y(re.size());
  y.real() = re;
  y.imag() = im;
  return y;
}

inline double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

/// Writes `row col value` lines (1-based) for external inspection.
inline void write_coordinate_text(const SparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write matrix file '" + path + "'");
  out << "% " << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n' << std::setprecision(17);
  for (int r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) out << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace teig
