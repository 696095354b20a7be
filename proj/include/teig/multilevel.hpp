#pragma once
// Nested level hierarchy, direct per-level solves, and the multi-level
// scheme: one coarse eigensolve, then per level a source-problem correction
// of each eigenvector followed by an eigensolve on the coarse space enriched
// with those corrections.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "teig/assembly.hpp"
#include "teig/coefficient.hpp"
#include "teig/eigensolver.hpp"
#include "teig/fespace.hpp"
#include "teig/linalg/dense.hpp"
#include "teig/linalg/lu.hpp"
#include "teig/mesh.hpp"

namespace teig {

struct Discretization {
  int m = 2;
  int sigma_degree = 1;
  int p_degree = 1;
  Coefficient n = Coefficient(16.0);
  CaseSelector cases = CaseSelector::from_bounds(16.0, 16.0);

  /// Default degrees for a given m: sigma and p one below m.
  static Discretization with_degree(int m, Coefficient n, CaseSelector cases) {
    return {m, m - 1, m - 1, std::move(n), cases};
  }
};

struct Level {
  std::shared_ptr<const Mesh> mesh;
  ProductSpace space;
  SparseMatrix A, B;
  SparseMatrix prolongation;  // previous level -> this level; empty on level 0
};

class LevelHierarchy {
 public:
  LevelHierarchy(std::vector<Level> levels, Discretization disc) : levels_(std::move(levels)), disc_(std::move(disc)) {}

  int size() const { return static_cast<int>(levels_.size()); }
  int finest() const { return size() - 1; }
  const Level& operator[](int i) const { return levels_.at(static_cast<std::size_t>(i)); }
  const Discretization& discretization() const { return disc_; }

  /// Maps a level-`from` vector to level `to` >= from.
  template <class Vec>
  Vec prolong(Vec x, int from, int to) const {
    for (int i = from + 1; i <= to; ++i) {
      if constexpr (std::is_same_v<std::decay_t<Vec>, ComplexVector>) x = multiply((*this)[i].prolongation, x);
      else x = (*this)[i].prolongation * x;
    }
    return x;
  }

  /// P_{from -> to} as a sparse matrix.
  SparseMatrix composite_prolongation(int from, int to) const {
    SparseMatrix p(levels_[static_cast<std::size_t>(from)].space.system_dim(),
                   levels_[static_cast<std::size_t>(from)].space.system_dim());
    p.setIdentity();
    for (int i = from + 1; i <= to; ++i) p = ((*this)[i].prolongation * p).pruned();
    return p;
  }

 private:
  std::vector<Level> levels_;
  Discretization disc_;
};

/// Builds `levels` nested meshes (the initial one and levels - 1 red
/// refinements) with their spaces, matrices and prolongations.
inline LevelHierarchy build_hierarchy(const Mesh& initial, int levels, const Discretization& disc) {
  if (levels < 1) throw ConfigError("a hierarchy needs at least one level, got " + std::to_string(levels));
  std::vector<Level> out;
  out.reserve(static_cast<std::size_t>(levels));
  Mesh current = initial;
  for (int i = 0; i < levels; ++i) {
    if (i > 0) current = refine_red(current);
    if (const auto problems = validate(current); !problems.empty())
      throw ConfigError("level " + std::to_string(i) + " mesh is invalid: " + problems.front());
    auto mesh = std::make_shared<const Mesh>(current);
    ProductSpace space(mesh, disc.m, disc.sigma_degree, disc.p_degree);
    SparseMatrix a = assemble_A(space, disc.n, disc.cases);
    SparseMatrix b = assemble_B(space);
    SparseMatrix p;
    if (i > 0) p = prolongate(out.back().space, space);
    out.push_back(Level{mesh, std::move(space), std::move(a), std::move(b), std::move(p)});
  }
  return LevelHierarchy(std::move(out), disc);
}

// ---------------------------------------------------------------------------

struct SolveOptions {
  int k = 6;
  double shift = 0.5;
  double tol = 1e-10;
  int max_restart = 50;
  std::uint64_t seed = ArnoldiOptions{}.seed;

  ArnoldiOptions arnoldi() const {
    ArnoldiOptions o;
    o.k = k;
    o.shift = shift;
    o.tol = tol;
    o.max_restart = max_restart;
    o.seed = seed;
    return o;
  }
};

/// Eigenpairs on one level and how they were obtained.
struct LevelResult {
  int level = 0;
  std::vector<EigenPair> pairs;  // ascending in the ordering
  bool converged = true;
  int basis_dim = 0;           // projected solves only
  int correction_columns = 0;  // after dropping
  int dropped_columns = 0;
  double seconds = 0.0;
};

struct MultilevelResult {
  std::vector<LevelResult> levels;
  std::vector<std::string> warnings;
  const LevelResult& finest() const { return levels.back(); }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Dense eigensolve of the projected pencil (Q^T A Q, Q^T B Q) by shift
/// inversion; returns coefficient vectors g in the basis Q.
inline std::vector<std::pair<Complex, ComplexVector>> projected_eigenpairs(const DenseMatrix& ap, const DenseMatrix& bp,
                                                                          const SolveOptions& opt) {
  const DenseMatrix kp = ap - opt.shift * bp;
  Eigen::PartialPivLU<DenseMatrix> lu(kp);
  if (!(lu.rcond() > 1e-14))
    throw SingularMatrixError("projected matrix A - shift*B is singular for shift = " + std::to_string(opt.shift) +
                              "; perturb the shift");
  const DenseEigen eig = dense_eig(lu.solve(bp), true);
  const ArnoldiOptions ao = opt.arnoldi();
  std::vector<std::pair<Complex, ComplexVector>> out;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    const Complex nu = eig.values[i];
    if (std::abs(nu) < ao.infinite_nu) continue;
    const Complex lambda = opt.shift + 1.0 / nu;
    if (std::abs(lambda) > ao.max_abs_lambda) continue;
    out.emplace_back(lambda, eig.vectors.col(static_cast<Eigen::Index>(i)));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return SpectrumOrder{}(a.first, b.first); });
  std::vector<Complex> values;
  for (const auto& p : out) values.push_back(p.first);
  out.resize(cut_with_conjugates(values, static_cast<std::size_t>(opt.k)));
  return out;
}

}  // namespace detail

/// First k eigenpairs of (A_level, B_level) by shift-invert Arnoldi.
inline LevelResult single_level_solve(const LevelHierarchy& h, int level, const SolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Level& lv = h[level];
  const ArnoldiResult r = shift_invert_arnoldi(lv.A, lv.B, opt.arnoldi());
  LevelResult out;
  out.level = level;
  out.pairs = r.pairs;
  out.converged = r.converged;
  out.seconds = detail::seconds_since(t0);
  return out;
}

struct Algorithm1Options {
  /// Replace the enriched space by the whole fine space on every level
  /// (dense; small problems only). The output then equals the direct solve.
  bool full_enrichment = false;
  double drop_tol = 1e-10;
};

/// Multi-level scheme over the whole hierarchy. Level 0 is a direct
/// Arnoldi solve; level i >= 1 solves A_i w = lambda B_i P x for every
/// previous eigenpair (real and imaginary parts as separate columns, one
/// column set per conjugate pair) and then the eigenproblem projected onto
/// range(P_{0->i}) + span{w}. Every level's pairs carry residuals against
/// that level's full matrices.
inline MultilevelResult algorithm1(const LevelHierarchy& h, const SolveOptions& opt, const Algorithm1Options& alg = {}) {
  MultilevelResult result;
  LevelResult coarse = single_level_solve(h, 0, opt);
  if (!coarse.converged)
    throw SolverError("coarse eigensolve did not converge within " + std::to_string(opt.max_restart) + " restarts");
  result.levels.push_back(std::move(coarse));

  SparseMatrix p0 = h.composite_prolongation(0, 0);
  for (int i = 1; i < h.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Level& lv = h[i];
    p0 = (lv.prolongation * p0).pruned();
    if (alg.full_enrichment) {
      p0.resize(lv.space.system_dim(), lv.space.system_dim());
      p0.setIdentity();
    }
    const LevelResult& prev = result.levels.back();

    // Corrections.
    const LUFactorization lu_a(lv.A);
    std::vector<Vector> cols;
    const auto& pp = prev.pairs;
    for (std::size_t j = 0; j < pp.size(); ++j) {
      const Complex lam = pp[j].lambda;
      bool partner_done = false;
      for (std::size_t q = 0; q < j; ++q)
        if (lam.imag() != 0.0 && pp[q].lambda == std::conj(lam)) partner_done = true;
      if (partner_done) continue;
      const ComplexVector x = multiply(lv.prolongation, pp[j].vector);
      const ComplexVector w = lam * lu_a.solve(multiply(lv.B, x));
      cols.push_back(w.real());
      if (lam.imag() != 0.0) cols.push_back(w.imag());
    }
    const int ncorr = static_cast<int>(cols.size());
    DenseMatrix w(lv.space.system_dim(), ncorr);
    for (int c = 0; c < ncorr; ++c) w.col(c) = cols[static_cast<std::size_t>(c)];

    // Remove components in range(P) (normal equations), then orthonormalize.
    const DenseMatrix gram = DenseMatrix(SparseMatrix(p0.transpose() * p0));
    const Eigen::LDLT<DenseMatrix> gram_f(gram);
    const DenseMatrix w_before = w;
    w -= p0 * gram_f.solve(DenseMatrix(p0.transpose() * w));
    // Drop relative to the original column norm.
    DenseMatrix scaled = w;
    for (int c = 0; c < ncorr; ++c) {
      const double n0 = w_before.col(c).norm();
      if (n0 > 0.0) scaled.col(c) /= n0;
    }
    std::vector<int> kept;
    DenseMatrix q = orthonormalize_columns(scaled, alg.drop_tol, &kept);
    const int dropped = ncorr - static_cast<int>(q.cols());
    if (dropped > 0 && !alg.full_enrichment)
      result.warnings.push_back("level " + std::to_string(i) + ": dropped " + std::to_string(dropped) +
                                " rank-deficient correction column(s)");

    // Projected pencil on [P | Q].
    const int nc = static_cast<int>(p0.cols()), nq = static_cast<int>(q.cols());
    auto project = [&](const SparseMatrix& m) {
      DenseMatrix out(nc + nq, nc + nq);
      const SparseMatrix mp = m * p0;
      const DenseMatrix mq = m * q;
      out.topLeftCorner(nc, nc) = DenseMatrix(SparseMatrix(p0.transpose() * mp));
      out.topRightCorner(nc, nq) = p0.transpose() * mq;
      out.bottomLeftCorner(nq, nc) = q.transpose() * mp;
      out.bottomRightCorner(nq, nq) = q.transpose() * mq;
      return out;
    };
    const auto projected = detail::projected_eigenpairs(project(lv.A), project(lv.B), opt);

    LevelResult lr;
    lr.level = i;
    lr.basis_dim = nc + nq;
    lr.correction_columns = nq;
    lr.dropped_columns = alg.full_enrichment ? 0 : dropped;
    for (const auto& pg : projected) {
      const ComplexVector& g = pg.second;
      ComplexVector x = multiply(p0, ComplexVector(g.head(nc))) + q.cast<Complex>() * g.tail(nq);
      normalize_eigenvector(x);
      EigenPair pair{pg.first, std::move(x), 0.0, true};
      pair.residual = residual(lv.A, lv.B, pair);
      pair.converged = pair.residual <= std::max(opt.tol, 1e-8);
      lr.pairs.push_back(std::move(pair));
    }
    if (static_cast<int>(lr.pairs.size()) < opt.k) {
      lr.converged = false;
      result.warnings.push_back("level " + std::to_string(i) + ": projected problem has only " +
                                std::to_string(lr.pairs.size()) + " finite eigenvalues");
    }
    lr.seconds = detail::seconds_since(t0);
    result.levels.push_back(std::move(lr));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Convergence orders

/// ord(i) = log2 |(v_N - v_{i-1}) / (v_N - v_i)| for i = 1..N-1, the finest
/// value v_N serving as reference. Entry i-1 holds ord(i); it is empty when
/// a difference vanishes.
inline std::vector<std::optional<double>> convergence_orders(const std::vector<Complex>& values) {
  if (values.size() < 3) throw ConfigError("convergence orders need at least 3 levels");
  const std::size_t n = values.size() - 1;
  std::vector<std::optional<double>> out;
  for (std::size_t i = 1; i < n; ++i) {
    const double num = std::abs(values[n] - values[i - 1]);
    const double den = std::abs(values[n] - values[i]);
    if (num == 0.0 || den == 0.0 || !std::isfinite(num) || !std::isfinite(den)) out.emplace_back();
    else out.emplace_back(std::log2(num / den));
  }
  return out;
}

inline std::vector<std::optional<double>> convergence_orders(const std::vector<double>& values) {
  return convergence_orders(std::vector<Complex>(values.begin(), values.end()));
}

/// ord(i) = log2(e_{i-1} / e_i) for errors e_i = ||x_N - x_i||, i = 1..N-1.
inline std::vector<std::optional<double>> error_orders(const std::vector<double>& errors) {
  std::vector<std::optional<double>> out;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(errors[i - 1] > 0.0)) out.emplace_back();
    else out.emplace_back(std::log2(errors[i - 1] / errors[i]));
  }
  return out;
}

/// H1 Gram matrix (mass + stiffness) of a scalar space.
inline SparseMatrix h1_gram(const LagrangeSpace& s) {
  return SparseMatrix(assemble_gram(s, GramNorm::L2) + assemble_gram(s, GramNorm::H1semi));
}

/// c * candidate for the complex c minimizing ||c * candidate - reference||
/// in the H1 inner product of the u component.
inline ComplexVector align_eigenfunction(const ProductSpace& space, const SparseMatrix& u_gram,
                                         const ComplexVector& candidate, const ComplexVector& reference) {
  const ComplexVector cu = component(space, candidate, Field::u);
  const ComplexVector ru = component(space, reference, Field::u);
  const ComplexVector gc = multiply(u_gram, cu);
  const Complex den = cu.dot(gc);
  if (std::abs(den) == 0.0) return candidate;
  const Complex c = gc.dot(ru) / den;  // (G cu)^H ru = cu^H G ru
  return c * candidate;
}

inline ComplexVector align_eigenfunction(const ProductSpace& space, const ComplexVector& candidate,
                                         const ComplexVector& reference) {
  return align_eigenfunction(space, h1_gram(space.space(Field::u)), candidate, reference);
}

/// For each of the first `count` finest-level eigenvalues (plus the partner
/// of a conjugate pair cut at `count`), the index of its counterpart on every
/// level (empty if none). Greedy matching by position
/// in spectrum order: the r-th real value of the finest level pairs with the
/// r-th real value of each level, and the r-th conjugate pair with the r-th
/// conjugate pair.
inline std::vector<std::vector<std::optional<int>>> match_across_levels(const std::vector<std::vector<Complex>>& per_level,
                                                                        int count) {
  const auto& ref = per_level.back();
  const int nref = std::min<int>(count, static_cast<int>(ref.size()));
  struct Unit {
    Complex rep;              // member with Im >= 0
    std::vector<int> members; // indices, upper member first
  };
  auto units_of = [](const std::vector<Complex>& v, int limit) {
    std::vector<Unit> units;
    std::vector<char> used(v.size(), 0);
    for (int i = 0; i < limit; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      used[static_cast<std::size_t>(i)] = 1;
      Unit u{v[static_cast<std::size_t>(i)], {i}};
      if (v[static_cast<std::size_t>(i)].imag() != 0.0) {
        for (int j = 0; j < static_cast<int>(v.size()); ++j)
          if (!used[static_cast<std::size_t>(j)] && v[static_cast<std::size_t>(j)] == std::conj(v[static_cast<std::size_t>(i)])) {
            used[static_cast<std::size_t>(j)] = 1;
            u.members.push_back(j);
            break;
          }
        if (u.rep.imag() < 0.0) {
          u.rep = std::conj(u.rep);
          if (u.members.size() == 2) std::swap(u.members[0], u.members[1]);
        }
      }
      units.push_back(std::move(u));
    }
    return units;
  };
  const std::vector<Unit> ref_units = units_of(ref, nref);
  // A conjugate pair straddling the cut brings its partner along.
  int nout = nref;
  for (const Unit& u : ref_units)
    for (int m : u.members) nout = std::max(nout, m + 1);

  std::vector<std::vector<std::optional<int>>> out(static_cast<std::size_t>(nout),
                                                   std::vector<std::optional<int>>(per_level.size()));
  for (std::size_t lvl = 0; lvl < per_level.size(); ++lvl) {
    const std::vector<Unit> cand = units_of(per_level[lvl], static_cast<int>(per_level[lvl].size()));
    std::vector<char> used(cand.size(), 0);
    for (const Unit& r : ref_units) {
      for (std::size_t c = 0; c < cand.size(); ++c) {
        if (used[c] || cand[c].members.size() != r.members.size()) continue;
        used[c] = 1;
        for (std::size_t k = 0; k < r.members.size(); ++k)
          out[static_cast<std::size_t>(r.members[k])][lvl] = cand[c].members[k];
        break;
      }
    }
  }
  return out;
}

/// One finest-level eigenvalue followed across the levels.
struct EigenSequence {
  int index = 0;                                   // position on the finest level
  std::vector<std::optional<int>> level_index;     // matched index per level
  std::vector<std::optional<Complex>> values;      // per level
  std::vector<std::optional<double>> orders;       // ord(i), i = 1..N-1
  bool persistent = false;                         // matched on every level
  bool real = false;                               // persistent and real everywhere
  std::optional<bool> monotone_last3;              // real sequences: non-increasing over the last 3 levels
  std::optional<bool> complex_persists;            // complex at the coarsest: |Im| keeps more than half
  std::vector<double> u_errors, phi_errors;        // ||x_N - x_i||_H1 for each level below the finest
  std::vector<std::optional<double>> u_orders, phi_orders;
};

struct ConvergenceReport {
  std::vector<double> h;  // mesh size per level
  std::vector<EigenSequence> sequences;
  std::vector<std::string> flags;  // soft-check findings
};

/// Follows the first `count` finest-level eigenvalues through the levels,
/// computes eigenvalue orders, and, for the first `eigenfunctions`
/// sequences, H1 errors of the u and phi components after prolongation to
/// the finest level and alignment.
inline ConvergenceReport convergence_report(const LevelHierarchy& h, const std::vector<LevelResult>& per_level, int count,
                                            int eigenfunctions = 1, int first_level = 0) {
  ConvergenceReport rep;
  const int nlev = static_cast<int>(per_level.size());
  for (const auto& lr : per_level) rep.h.push_back(mesh_size(*h[lr.level].mesh));
  std::vector<std::vector<Complex>> values(static_cast<std::size_t>(nlev));
  for (int l = 0; l < nlev; ++l)
    for (const auto& p : per_level[static_cast<std::size_t>(l)].pairs) values[static_cast<std::size_t>(l)].push_back(p.lambda);
  const auto match = match_across_levels(values, count);

  const int fine_level = per_level.back().level;
  const ProductSpace& fine = h[fine_level].space;
  SparseMatrix u_gram;
  if (eigenfunctions > 0) u_gram = h1_gram(fine.space(Field::u));

  for (std::size_t s = 0; s < match.size(); ++s) {
    EigenSequence seq;
    seq.index = static_cast<int>(s);
    seq.level_index = match[s];
    seq.persistent = true;
    seq.real = true;
    for (int l = 0; l < nlev; ++l) {
      const auto& idx = match[s][static_cast<std::size_t>(l)];
      if (l < first_level) {
        seq.values.emplace_back();
        continue;
      }
      if (idx) {
        const Complex v = values[static_cast<std::size_t>(l)][static_cast<std::size_t>(*idx)];
        seq.values.emplace_back(v);
        if (v.imag() != 0.0) seq.real = false;
      } else {
        seq.values.emplace_back();
        seq.persistent = false;
      }
    }
    seq.real = seq.real && seq.persistent;
    if (seq.persistent && nlev - first_level >= 3) {
      std::vector<Complex> v;
      for (int l = first_level; l < nlev; ++l) v.push_back(*seq.values[static_cast<std::size_t>(l)]);
      const auto ord = convergence_orders(v);
      seq.orders.assign(static_cast<std::size_t>(first_level), std::nullopt);
      seq.orders.insert(seq.orders.end(), ord.begin(), ord.end());
    }
    if (seq.real && nlev - first_level >= 3) {
      const double a = seq.values[static_cast<std::size_t>(nlev - 3)]->real();
      const double b = seq.values[static_cast<std::size_t>(nlev - 2)]->real();
      const double c = seq.values[static_cast<std::size_t>(nlev - 1)]->real();
      seq.monotone_last3 = a >= b && b >= c;
      if (!*seq.monotone_last3)
        rep.flags.push_back("eigenvalue " + std::to_string(s + 1) + " is not non-increasing over the last three levels");
    }
    if (seq.persistent && seq.values[static_cast<std::size_t>(first_level)]->imag() != 0.0) {
      const double im0 = std::abs(seq.values[static_cast<std::size_t>(first_level)]->imag());
      const double imn = std::abs(seq.values.back()->imag());
      seq.complex_persists = imn > 0.5 * im0;
      if (!*seq.complex_persists)
        rep.flags.push_back("complex eigenvalue " + std::to_string(s + 1) + " loses more than half its imaginary part");
    }

    if (static_cast<int>(s) < eigenfunctions && seq.persistent) {
      const ComplexVector& ref = per_level.back().pairs[static_cast<std::size_t>(*match[s].back())].vector;
      for (int l = first_level; l + 1 < nlev; ++l) {
        const LevelResult& lr = per_level[static_cast<std::size_t>(l)];
        ComplexVector x = h.prolong(lr.pairs[static_cast<std::size_t>(*match[s][static_cast<std::size_t>(l)])].vector,
                                    lr.level, fine_level);
        x = align_eigenfunction(fine, u_gram, x, ref);
        const ComplexVector d = ref - x;
        auto h1 = [&](Field f) {
          const ComplexVector c = component(fine, d, f);
          return std::real(c.dot(multiply(u_gram, c)));
        };
        seq.u_errors.push_back(std::sqrt(std::max(0.0, h1(Field::u))));
        seq.phi_errors.push_back(std::sqrt(std::max(0.0, h1(Field::phi1) + h1(Field::phi2))));
      }
      seq.u_orders.assign(static_cast<std::size_t>(first_level), std::nullopt);
      seq.phi_orders.assign(static_cast<std::size_t>(first_level), std::nullopt);
      for (const auto& o : error_orders(seq.u_errors)) seq.u_orders.push_back(o);
      for (const auto& o : error_orders(seq.phi_errors)) seq.phi_orders.push_back(o);
    }
    rep.sequences.push_back(std::move(seq));
  }
  return rep;
}

}  // namespace teig
