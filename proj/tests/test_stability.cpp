#include <gtest/gtest.h>

#include <cmath>

#include "teig/stability.hpp"

using namespace teig;

TEST(Coercivity, ConstantFormula) {
  EXPECT_NEAR(coercivity_constant(16.0, 16.0), (1.0 / 15.0) * 0.75, 1e-15);
  EXPECT_NEAR(coercivity_constant(4.0, 6.0), 0.2 * 0.5, 1e-15);
  EXPECT_THROW(coercivity_constant(0.5, 2.0), ConfigError);
  EXPECT_THROW(coercivity_constant(3.0, 2.0), ConfigError);
}

TEST(Coercivity, SampledBoundHoldsForConstantAndVariableCoefficient) {
  for (double h : {0.5, 0.25}) {
    const ProductSpace s(std::make_shared<const Mesh>(unit_square_mesh(h)), 2, 1, 1);
    const SparseMatrix a16 = assemble_A(s, Coefficient(16.0), CaseSelector::from_bounds(16.0, 16.0));
    const auto r16 = sample_coercivity(s, a16, 16.0, 16.0, 50, 1);
    EXPECT_EQ(r16.samples, 50);
    EXPECT_GE(r16.min_margin, -1e-10 * r16.max_lhs);
    const auto cs = CaseSelector::from_bounds(4.0, 6.0);
    const SparseMatrix av = assemble_A(s, Coefficient::parse("x1^2 + x2^2 + 4"), cs);
    const auto rv = sample_coercivity(s, av, 4.0, 6.0, 50, 2);
    EXPECT_GE(rv.min_margin, -1e-10 * rv.max_lhs);
  }
}

TEST(InfSup, LowerSigmaDegreeIsStable) {
  const ProductSpace s(std::make_shared<const Mesh>(unit_square_mesh(0.25)), 2, 1, 1);
  const SparseMatrix a = assemble_A(s, Coefficient(16.0), CaseSelector::from_bounds(16.0, 16.0));
  const auto est = inf_sup_constant(s, a);
  EXPECT_EQ(est.sigma_dim, s.dim(Field::sigma));
  EXPECT_EQ(est.zero_modes, 1);  // constants: sigma's mean is fixed by the border
  EXPECT_GT(est.constant, 0.2);
}
