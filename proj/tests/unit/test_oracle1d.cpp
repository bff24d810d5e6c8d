#include "pqlip/errors.hpp"
#include "pqlip/operators.hpp"
#include "pqlip/oracle1d.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pqlip;

TEST(ExactMinimizer, QuarterConstantForUnitJump) {
  const ExactMinimizer m(Oracle1DProblem(0.5, 2.0, 0.0, 1.0));
  EXPECT_DOUBLE_EQ(m.c(), 0.25);
  // u = (1 + sgn(x) sqrt|x|) / 2
  for (double x : {-1.0, -0.49, -0.01, 0.0, 0.04, 0.81, 1.0})
    EXPECT_NEAR(m.u(x), 0.5 * (1.0 + std::copysign(std::sqrt(std::abs(x)), x)), 1e-15) << x;
  EXPECT_NEAR(m.du(0.25), 0.25 / 0.5, 1e-15);
  EXPECT_TRUE(std::isinf(m.du(0.0)));
  // c^{p/(p-1)} 2/(1-beta) = 1/16 * 4
  EXPECT_NEAR(m.energy(), 0.25, 1e-15);
}

TEST(ExactMinimizer, BoundaryValuesAreExact) {
  for (double alpha : {0.0, 0.3, 0.5, 0.9})
    for (double p : {2.0, 3.0, 1.5 + alpha}) {
      const Oracle1DProblem prob(alpha, p, -0.7, 2.3);
      const ExactMinimizer m(prob);
      EXPECT_NEAR(m.u(-1.0), -0.7, 1e-14);
      EXPECT_NEAR(m.u(1.0), 2.3, 1e-14);
    }
}

TEST(ExactMinimizer, EqualBoundaryValuesGiveConstant) {
  const ExactMinimizer m(Oracle1DProblem(0.5, 2.0, 1.5, 1.5));
  EXPECT_EQ(m.c(), 0.0);
  EXPECT_EQ(m.energy(), 0.0);
  for (double x : {-1.0, 0.0, 0.3}) {
    EXPECT_EQ(m.u(x), 1.5);
    EXPECT_EQ(m.du(x), 0.0);
  }
}

TEST(ExactMinimizer, ZeroWeightExponentIsAffine) {
  const ExactMinimizer m(Oracle1DProblem(0.0, 3.0, 0.0, 2.0));
  for (double x : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
    EXPECT_NEAR(m.u(x), x + 1.0, 1e-14);
    EXPECT_NEAR(m.du(x), 1.0, 1e-14);
  }
  EXPECT_NEAR(m.energy(), 2.0, 1e-14);
}

TEST(ExactMinimizer, DerivativeKeepsTheSignOfTheJump) {
  const ExactMinimizer up(Oracle1DProblem(0.4, 2.5, 0.0, 1.0));
  const ExactMinimizer down(Oracle1DProblem(0.4, 2.5, 1.0, 0.0));
  for (int k = 0; k <= 200; ++k) {
    const double x = -1.0 + 0.01 * k;
    ASSERT_GT(up.du(x), 0.0);
    ASSERT_LT(down.du(x), 0.0);
  }
}

TEST(ExactMinimizer, EnergyMatchesQuadrature) {
  const Oracle1DProblem prob(0.3, 2.5, 0.0, 1.0);
  const ExactMinimizer m(prob);
  // Substituting x = t^2 on each half removes the endpoint singularity.
  const int n = 200000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) / n;
    const double x = t * t;
    s += std::pow(x, prob.alpha()) * std::pow(std::abs(m.du(x)), prob.p()) * 2.0 * t / n;
  }
  EXPECT_NEAR(2.0 * s, m.energy(), 1e-6 * m.energy());
}

TEST(BlowUpRate, Examples) {
  EXPECT_DOUBLE_EQ(blow_up_rate(0.5, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(blow_up_rate(0.5, 3.0), 0.25);
  EXPECT_EQ(blow_up_rate(0.0, 2.0), 0.0);
  EXPECT_THROW(blow_up_rate(0.9, 1.5), PreconditionError);
}

TEST(Oracle1DProblem, Preconditions) {
  EXPECT_THROW(Oracle1DProblem(1.0, 2.0, 0, 1), PreconditionError);
  EXPECT_THROW(Oracle1DProblem(-0.1, 2.0, 0, 1), PreconditionError);
  EXPECT_THROW(Oracle1DProblem(0.5, 1.0, 0, 1), PreconditionError);
  EXPECT_THROW(Oracle1DProblem(0.6, 1.5, 0, 1), PreconditionError);
  EXPECT_THROW(ExactMinimizer(Oracle1DProblem(0.5, 2.0, 0, 1)).u(1.5), DomainError);
}

TEST(EulerSpread, DiscreteMinimizerHasConstantFlux) {
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const Grid g(1, 513);
  const auto res = minimize(prob.density(), g, prob.boundary());
  EXPECT_LT(euler_invariant_spread(res.field, prob.density()), 1e-6);
}

TEST(EulerSpread, SampledClosedFormIsNearlyConstant) {
  // Cell averages of |x|^{-1/2} differ from the midpoint value by about 1.5%
  // on the first retained cell, independent of the grid.
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const auto f = exact_minimizer(prob).sample(Grid(1, 513));
  EXPECT_LT(euler_invariant_spread(f, prob.density()), 0.02);
  ASSERT_TRUE(f.certificate());
  EXPECT_EQ(f.certificate()->source, "closed_form");
}

TEST(EulerSpread, ZeroFluxGivesZero) {
  const Oracle1DProblem prob(0.5, 2.0, 1.0, 1.0);
  const auto f = exact_minimizer(prob).sample(Grid(1, 33));
  EXPECT_EQ(euler_invariant_spread(f, prob.density()), 0.0);
}

TEST(DiscreteOracle, ConvergesToClosedForm) {
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const ExactMinimizer m(prob);
  double prev = 1.0;
  for (std::size_t n : {129u, 513u, 2049u}) {
    const Grid g(1, n);
    const auto res = minimize(prob.density(), g, prob.boundary());
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(res.field.at(0, i) - m.u(g.node_coord(i))));
    EXPECT_LT(err, prev);
    prev = err;
    EXPECT_NEAR(res.report.energy, m.energy(), 0.05 * m.energy());
  }
}

TEST(Refinement, ObservedGrowthMatchesBlowUpRate) {
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const auto rows = refinement_study(prob, {129, 257, 513});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(std::isnan(rows[0].observed_factor));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_NEAR(rows[k].predicted_factor, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(rows[k].observed_factor, std::sqrt(2.0), 0.1 * std::sqrt(2.0));
    EXPECT_GT(rows[k].max_gradient, rows[k - 1].max_gradient);
  }
}
