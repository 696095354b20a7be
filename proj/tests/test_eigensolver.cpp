#include <gtest/gtest.h>

#include <algorithm>

#include "teig/assembly.hpp"
#include "teig/eigensolver.hpp"
#include "teig/linalg/dense.hpp"

using namespace teig;

namespace {

SparseMatrix sparse(const DenseMatrix& d) { return d.sparseView(); }

SparseMatrix identity(int n) {
  SparseMatrix i(n, n);
  i.setIdentity();
  return i;
}

std::vector<Complex> values_of(const ArnoldiResult& r) {
  std::vector<Complex> v;
  for (const auto& p : r.pairs) v.push_back(p.lambda);
  return v;
}

}  // namespace

TEST(Ordering, ModulusThenDescendingArgument) {
  EXPECT_TRUE(eqslantless(0.0, 0.0));
  EXPECT_TRUE(eqslantless(0.0, 1e-300));
  EXPECT_FALSE(eqslantless(2.0, 1.0));
  EXPECT_TRUE(eqslantless(1.0, Complex(0.0, 2.0)));
  // Equal moduli: larger argument in [0, 2pi) comes first.
  EXPECT_LT(compare_eqslantless(Complex(0, -1), Complex(0, 1)), 0);  // 3pi/2 vs pi/2
  EXPECT_LT(compare_eqslantless(-1.0, 1.0), 0);                      // pi vs 0
  EXPECT_LT(compare_eqslantless(Complex(3, -4), Complex(-3, 4)), 0);
  EXPECT_EQ(compare_eqslantless(Complex(2, 1), Complex(2, 1)), 0);
  EXPECT_NEAR(argument_0_2pi(Complex(0, -1)), 1.5 * std::numbers::pi, 1e-15);
  EXPECT_EQ(argument_0_2pi(1.0), 0.0);
}

TEST(Ordering, SortsConjugatePairsAdjacentLowerFirst) {
  std::vector<Complex> v{25.3979, Complex(15.2871, 9.2904), 35.5305, Complex(15.2871, -9.2904), 27.9052};
  std::sort(v.begin(), v.end(), SpectrumOrder{});
  EXPECT_EQ(v[0], Complex(15.2871, -9.2904));
  EXPECT_EQ(v[1], Complex(15.2871, 9.2904));
  EXPECT_EQ(v[2], Complex(25.3979));
  EXPECT_EQ(v[4], Complex(35.5305));
}

TEST(Closure, PairedAndUnpairedValues) {
  const std::vector<Complex> good{Complex(15.2871, 9.2904), Complex(15.2871, -9.2904), 25.3979, 25.3979, 27.9052,
                                  35.5305};
  EXPECT_TRUE(verify_conjugate_closure(good, 1e-6).closed());
  std::vector<Complex> bad = good;
  bad.erase(bad.begin() + 1);
  const auto rep = verify_conjugate_closure(bad, 1e-6);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_NE(rep.violations[0].find("no conjugate partner"), std::string::npos);
  // Partner within tolerance, partner outside, and one partner shared by two.
  EXPECT_TRUE(verify_conjugate_closure({Complex(10, 1), Complex(10 + 1e-6, -1)}, 1e-6).closed());
  EXPECT_FALSE(verify_conjugate_closure({Complex(10, 1), Complex(10 + 1e-3, -1)}, 1e-6).closed());
  EXPECT_FALSE(verify_conjugate_closure({Complex(10, 1), Complex(10, 1), Complex(10, -1)}, 1e-6).closed());
}

TEST(Closure, CutKeepsConjugatePartner) {
  const std::vector<Complex> v{1.0, Complex(2, -1), Complex(2, 1), 5.0};
  EXPECT_EQ(cut_with_conjugates(v, 1), 1u);
  EXPECT_EQ(cut_with_conjugates(v, 2), 3u);
  EXPECT_EQ(cut_with_conjugates(v, 3), 3u);
  EXPECT_EQ(cut_with_conjugates(v, 9), 4u);
}

TEST(Arnoldi, DiagonalPencil) {
  const int n = 40;
  const SparseMatrix a = sparse(Vector::LinSpaced(n, 1.0, n).asDiagonal().toDenseMatrix());
  ArnoldiOptions o;
  o.k = 3;
  const ArnoldiResult r = shift_invert_arnoldi(a, identity(n), o);
  EXPECT_TRUE(r.converged);
  const auto v = values_of(r);
  ASSERT_GE(v.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(v[static_cast<std::size_t>(i)] - Complex(i + 1.0)), 0.0, 1e-10);
  for (const auto& p : r.pairs) EXPECT_LE(p.residual, 1e-10);
}

TEST(Arnoldi, ComplexPairAndConjugateVectors) {
  const int n = 40;
  DenseMatrix d = Vector::LinSpaced(n, 1.0, n).asDiagonal();
  d.topLeftCorner(2, 2) << 2, -1, 1, 2;  // 2 +- i
  ArnoldiOptions o;
  o.k = 3;
  const ArnoldiResult r = shift_invert_arnoldi(sparse(d), identity(n), o);
  const auto v = values_of(r);
  ASSERT_GE(v.size(), 3u);
  EXPECT_NEAR(std::abs(v[0] - Complex(2, -1)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(v[1] - Complex(2, 1)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(v[2] - Complex(3.0)), 0.0, 1e-10);
  EXPECT_LT((r.pairs[0].vector - r.pairs[1].vector.conjugate()).norm(), 1e-8);
}

TEST(Arnoldi, MatchesDenseOracleOnCoarsePencil) {
  const ProductSpace s(std::make_shared<const Mesh>(unit_square_mesh(0.25)), 2, 1, 1);
  const SparseMatrix a = assemble_A(s, Coefficient(16.0), CaseSelector::from_bounds(16.0, 16.0));
  const SparseMatrix b = assemble_B(s);
  ArnoldiOptions o;
  o.k = 6;
  const ArnoldiResult r = shift_invert_arnoldi(a, b, o);
  ASSERT_TRUE(r.converged);

  // Oracle: every finite eigenvalue of (A - sB)^{-1} B, densely.
  const DenseMatrix t = DenseMatrix(a - o.shift * b).partialPivLu().solve(DenseMatrix(b));
  std::vector<Complex> all;
  for (Complex nu : dense_eig(t, false).values)
    if (std::abs(nu) > 1e-8) all.push_back(o.shift + 1.0 / nu);
  std::sort(all.begin(), all.end(), SpectrumOrder{});
  const auto got = values_of(r);
  ASSERT_GE(got.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(std::abs(got[i] - all[i]) / std::abs(all[i]), 1e-8) << i;
  EXPECT_TRUE(verify_conjugate_closure(got, 1e-6).closed());
}

TEST(Arnoldi, SingularShiftReported) {
  const int n = 40;
  const SparseMatrix a = sparse(Vector::LinSpaced(n, 1.0, n).asDiagonal().toDenseMatrix());
  ArnoldiOptions o;
  o.shift = 3.0;
  try {
    shift_invert_arnoldi(a, identity(n), o);
    FAIL() << "expected SingularMatrixError";
  } catch (const SingularMatrixError& e) {
    EXPECT_NE(std::string(e.what()).find("perturb the shift"), std::string::npos);
  }
}

TEST(Arnoldi, SeedDeterminism) {
  const ProductSpace s(std::make_shared<const Mesh>(unit_square_mesh(0.25)), 2, 1, 1);
  const SparseMatrix a = assemble_A(s, Coefficient(16.0), CaseSelector::from_bounds(16.0, 16.0));
  const SparseMatrix b = assemble_B(s);
  ArnoldiOptions o;
  const auto r1 = values_of(shift_invert_arnoldi(a, b, o));
  const auto r2 = values_of(shift_invert_arnoldi(a, b, o));
  EXPECT_EQ(r1, r2);
  o.seed = 99;
  const auto r3 = values_of(shift_invert_arnoldi(a, b, o));
  ASSERT_GE(r3.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(std::abs(r1[i] - r3[i]) / std::abs(r1[i]), 1e-8);
}

TEST(Arnoldi, InvalidArguments) {
  ArnoldiOptions o;
  o.k = 0;
  EXPECT_THROW(shift_invert_arnoldi(identity(5), identity(5), o), ConfigError);
  EXPECT_THROW(shift_invert_arnoldi(identity(5), identity(4), ArnoldiOptions{}), ConfigError);
}

TEST(EigenVector, NormalizationIsConjugationEquivariant) {
  ComplexVector x(3);
  x << Complex(1, 2), Complex(-3, 1), Complex(0.5, 0);
  ComplexVector y = x.conjugate();
  normalize_eigenvector(x);
  normalize_eigenvector(y);
  EXPECT_NEAR(x.norm(), 1.0, 1e-15);
  EXPECT_EQ(x(1).imag(), 0.0);
  EXPECT_GT(x(1).real(), 0.0);
  EXPECT_LT((x - y.conjugate()).norm(), 1e-15);
}
