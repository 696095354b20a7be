#include <gtest/gtest.h>

#include <cmath>

#include "teig/multilevel.hpp"

using namespace teig;

namespace {

LevelHierarchy small_hierarchy(double h0, int levels, const std::string& n = "16", double ns = 16, double nb = 16) {
  return build_hierarchy(unit_square_mesh(h0), levels,
                         Discretization::with_degree(2, Coefficient::parse(n), CaseSelector::from_bounds(ns, nb)));
}

std::vector<Complex> values_of(const LevelResult& r) {
  std::vector<Complex> v;
  for (const auto& p : r.pairs) v.push_back(p.lambda);
  return v;
}

}  // namespace

TEST(Orders, GeometricSequenceHasOrderTwo) {
  // v_i = 10 + 4^{-i}: with the finest value as reference,
  // ord(i) = log2((4^{-(i-1)} - 4^{-N}) / (4^{-i} - 4^{-N})).
  std::vector<double> v;
  for (int i = 0; i < 5; ++i) v.push_back(10.0 + std::pow(4.0, -i));
  const auto o = convergence_orders(v);
  ASSERT_EQ(o.size(), 3u);
  for (int i = 1; i <= 3; ++i) {
    const double expect = std::log2((std::pow(4.0, -(i - 1)) - std::pow(4.0, -4)) / (std::pow(4.0, -i) - std::pow(4.0, -4)));
    ASSERT_TRUE(o[static_cast<std::size_t>(i - 1)]);
    EXPECT_NEAR(*o[static_cast<std::size_t>(i - 1)], expect, 1e-12);
  }
  EXPECT_NEAR(*o[0], std::log2(255.0 / 63.0), 1e-12);
}

TEST(Orders, ConstantSequenceIsUndefined) {
  const auto o = convergence_orders(std::vector<double>{3.0, 3.0, 3.0});
  ASSERT_EQ(o.size(), 1u);
  EXPECT_FALSE(o[0]);
  EXPECT_THROW(convergence_orders(std::vector<double>{1.0, 2.0}), ConfigError);
  const auto e = error_orders({0.4, 0.1, 0.025, 0.0});
  EXPECT_NEAR(*e[0], 2.0, 1e-14);
  EXPECT_NEAR(*e[1], 2.0, 1e-14);
  EXPECT_FALSE(e[2]);
}

TEST(Matching, RankWithinTypeAndPairsStayTogether) {
  const std::vector<std::vector<Complex>> per_level{
      {1.05, 2.1, Complex(5, -1.2), Complex(5, 1.2)},
      {1.0, 1.9, 2.0, Complex(5, -1), Complex(5, 1)},
  };
  const auto m = match_across_levels(per_level, 4);  // the cut splits the pair
  ASSERT_EQ(m.size(), 5u);
  EXPECT_EQ(m[0][0], 0);
  EXPECT_EQ(m[1][0], 1);
  EXPECT_FALSE(m[2][0]);
  EXPECT_EQ(m[3][0], 2);
  EXPECT_EQ(m[4][0], 3);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(m[static_cast<std::size_t>(i)][1], i);
}

TEST(Matching, RealValueNeverMatchesPairMember) {
  const std::vector<std::vector<Complex>> per_level{{Complex(3, -1), Complex(3, 1), 4.0}, {3.1, 3.2, 4.0}};
  const auto m = match_across_levels(per_level, 3);
  EXPECT_EQ(m[0][0], 2);
  EXPECT_FALSE(m[1][0]);
  EXPECT_FALSE(m[2][0]);
}

TEST(Algorithm1, OneLevelIsTheCoarseSolve) {
  const LevelHierarchy h = small_hierarchy(0.25, 1);
  SolveOptions o;
  const auto ml = algorithm1(h, o);
  ASSERT_EQ(ml.levels.size(), 1u);
  EXPECT_EQ(values_of(ml.finest()), values_of(single_level_solve(h, 0, o)));
}

TEST(Algorithm1, FullEnrichmentReproducesTheDirectSolve) {
  const LevelHierarchy h = small_hierarchy(0.5, 2);
  SolveOptions o;
  o.k = 4;
  Algorithm1Options alg;
  alg.full_enrichment = true;
  const auto ml = algorithm1(h, o, alg);
  const auto direct = values_of(single_level_solve(h, 1, o));
  const auto got = values_of(ml.finest());
  ASSERT_GE(got.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(std::abs(got[i] - direct[i]) / std::abs(direct[i]), 1e-8) << i;
}

TEST(Algorithm1, EnrichedBasisSizeAndResiduals) {
  const LevelHierarchy h = small_hierarchy(0.25, 2);
  SolveOptions o;
  const auto ml = algorithm1(h, o);
  const LevelResult& fine = ml.finest();
  const int k_prev = static_cast<int>(ml.levels[0].pairs.size());
  EXPECT_LE(fine.basis_dim, h[0].space.system_dim() + 2 * k_prev);
  EXPECT_GE(fine.basis_dim, h[0].space.system_dim());
  for (const auto& p : fine.pairs) {
    EXPECT_NEAR(p.residual, residual(h[1].A, h[1].B, p), 1e-15);
    EXPECT_TRUE(std::isfinite(p.residual));
  }
  // Closer to the direct fine solve than the coarse values are.
  const auto direct = values_of(single_level_solve(h, 1, o));
  const auto coarse = values_of(ml.levels[0]);
  EXPECT_LT(std::abs(fine.pairs[0].lambda - direct[0]), std::abs(coarse[0] - direct[0]));
}

TEST(Algorithm1, ConjugatePairContributesTwoRealColumns) {
  const LevelHierarchy h = small_hierarchy(0.25, 2, "x1^2 + x2^2 + 4", 4.0, 6.0);
  SolveOptions o;
  const auto ml = algorithm1(h, o);
  int reals = 0, pairs = 0;
  for (const auto& p : ml.levels[0].pairs) (p.lambda.imag() == 0.0 ? reals : pairs) += 1;
  ASSERT_GT(pairs, 0) << "expected a complex pair on the coarse level";
  // Each pair (two values) gives Re and Im of one correction: 2 columns.
  EXPECT_EQ(ml.finest().correction_columns + ml.finest().dropped_columns, reals + pairs);
  EXPECT_TRUE(verify_conjugate_closure(ml.finest().pairs, 1e-6).closed());
}

TEST(Alignment, RemovesComplexScaling) {
  const LevelHierarchy h = small_hierarchy(0.25, 1);
  const auto r = single_level_solve(h, 0, SolveOptions{});
  const ComplexVector x = r.pairs[0].vector;
  const ComplexVector scaled = Complex(-0.3, 2.0) * x;
  const ComplexVector aligned = align_eigenfunction(h[0].space, scaled, x);
  EXPECT_LT((aligned - x).norm(), 1e-12);
}

TEST(Report, SequencesAndOrdersOnThreeLevels) {
  const LevelHierarchy h = small_hierarchy(0.25, 3);
  SolveOptions o;
  o.k = 4;
  std::vector<LevelResult> per;
  for (int l = 0; l < 3; ++l) per.push_back(single_level_solve(h, l, o));
  const auto rep = convergence_report(h, per, 2, 1);
  ASSERT_EQ(rep.h.size(), 3u);
  EXPECT_NEAR(rep.h[0] / rep.h[1], 2.0, 1e-12);
  ASSERT_GE(rep.sequences.size(), 2u);  // a pair cut at 2 keeps its partner
  EXPECT_TRUE(rep.sequences[0].persistent);
  EXPECT_EQ(rep.sequences[0].orders.size(), 1u);
  // Errors against the finest level, one per coarser level, decreasing.
  ASSERT_EQ(rep.sequences[0].u_errors.size(), 2u);
  EXPECT_GT(rep.sequences[0].u_errors[0], rep.sequences[0].u_errors[1]);
  EXPECT_GT(rep.sequences[0].u_errors[1], 0.0);
}
