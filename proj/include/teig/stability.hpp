#pragma once
// Stability measurements on assembled systems: the sampled coercivity bound
// of the (y, phi) block and the discrete inf-sup constant of the rot
// coupling between phi and sigma.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "teig/assembly.hpp"
#include "teig/coefficient.hpp"
#include "teig/error.hpp"
#include "teig/fespace.hpp"
#include "teig/linalg/sparse.hpp"

namespace teig {

/// (1/(n_b-1)) (1 - sqrt(1/n_s)); defined for n_s > 1.
inline double coercivity_constant(double n_s, double n_b) {
  if (!(n_s > 1.0) || !(n_b >= n_s)) throw ConfigError("coercivity constant needs 1 < n_s <= n_b");
  return (1.0 / (n_b - 1.0)) * (1.0 - std::sqrt(1.0 / n_s));
}

struct CoercivitySample {
  int samples = 0;
  double constant = 0.0;
  double min_margin = 0.0;  // min over samples of lhs - rhs; >= -slack passes
  double max_lhs = 0.0;
};

/// For `count` random w supported on (y, phi):
///   w^T A w >= c (|y|^2 + |div phi|^2) + |rot phi|^2,
/// c = coercivity_constant(n_s, n_b), norms from Gram matrices.
inline CoercivitySample sample_coercivity(const ProductSpace& space, const SparseMatrix& a, double n_s, double n_b,
                                          int count, std::uint64_t seed) {
  const int ny = space.dim(Field::y), nphi = space.dim(Field::phi1) + space.dim(Field::phi2);
  const int oy = space.offset(Field::y), ophi = space.offset(Field::phi1);
  const SparseMatrix ayy = extract_block(a, oy, ny, oy, ny);
  const SparseMatrix ayp = extract_block(a, oy, ny, ophi, nphi);
  const SparseMatrix apy = extract_block(a, ophi, nphi, oy, ny);
  const SparseMatrix app = extract_block(a, ophi, nphi, ophi, nphi);
  const SparseMatrix my = assemble_gram(space.space(Field::y), GramNorm::L2);
  const PhiGrams g = assemble_phi_grams(space);

  CoercivitySample out;
  out.samples = count;
  out.constant = coercivity_constant(n_s, n_b);
  out.min_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  for (int s = 0; s < count; ++s) {
    Vector y(ny), phi(nphi);
    for (int i = 0; i < ny; ++i) y(i) = dist(rng);
    for (int i = 0; i < nphi; ++i) phi(i) = dist(rng);
    const double lhs = y.dot(ayy * y) + y.dot(ayp * phi) + phi.dot(apy * y) + phi.dot(app * phi);
    const double rhs = out.constant * (y.dot(my * y) + phi.dot(g.div * phi)) + phi.dot(g.rot * phi);
    out.min_margin = std::min(out.min_margin, lhs - rhs);
    out.max_lhs = std::max(out.max_lhs, std::abs(lhs));
  }
  return out;
}

struct InfSupEstimate {
  double constant = 0.0;  // smallest nonzero generalized singular value
  int zero_modes = 0;     // generalized singular values below the cutoff
  int sigma_dim = 0;
};

/// inf_sigma sup_psi (sigma, rot psi) / (|psi|_1 |sigma|_0) from the psi x
/// sigma block C of A: the eigenvalues of C^T K^{-1} C s = beta^2 M s with
/// K the H1-seminorm Gram of (phi1, phi2) and M the sigma mass. Values with
/// beta^2 <= 1e-10 max beta^2 count as zero modes (the constant always is one).
inline InfSupEstimate inf_sup_constant(const ProductSpace& space, const SparseMatrix& a) {
  const int nphi1 = space.dim(Field::phi1), nphi = nphi1 + space.dim(Field::phi2);
  const int ns = space.dim(Field::sigma);
  const SparseMatrix c = extract_block(a, space.offset(Field::phi1), nphi, space.offset(Field::sigma), ns);
  const SparseMatrix k1 = assemble_gram(space.space(Field::phi1), GramNorm::H1semi);
  std::vector<Triplet> trip;
  for (int blk = 0; blk < 2; ++blk)
    for (int r = 0; r < k1.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(k1, r); it; ++it)
        trip.emplace_back(blk * nphi1 + r, blk * nphi1 + it.col(), it.value());
  const Eigen::SparseMatrix<double> k = from_triplets(nphi, nphi, trip);
  const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kf(k);
  if (kf.info() != Eigen::Success) throw SolverError("inf-sup estimate: phi stiffness is not positive definite");

  const DenseMatrix cd = DenseMatrix(c);
  const DenseMatrix kc = kf.solve(cd);
  DenseMatrix s = cd.transpose() * kc;
  s = 0.5 * (s + s.transpose()).eval();
  const DenseMatrix m = DenseMatrix(assemble_gram(space.space(Field::sigma), GramNorm::L2));
  const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(s, m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SolverError("inf-sup estimate: generalized eigensolver failed");

  InfSupEstimate out;
  out.sigma_dim = ns;
  const Vector& ev = eig.eigenvalues();
  const double cutoff = 1e-10 * ev.maxCoeff();
  out.constant = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < ev.size() && std::isnan(out.constant); ++i) {  // ascending
    if (ev(i) <= cutoff) ++out.zero_modes;
    else out.constant = std::sqrt(ev(i));
  }
  return out;
}

}  // namespace teig
