#include "pqlip/density.hpp"
#include "pqlip/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pqlip;

namespace {

std::vector<double> pt(double x) { return {x}; }
std::vector<double> pt(double x, double y) { return {x, y}; }

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

Density elliptic_double_phase() {
  return Density::double_phase(Coefficient::power_weight(0.5, {-1.5, 0.0}), 2.0,
                               Coefficient::power_weight(1.5, {0.5, 2.0}), 3.0);
}

} // namespace

TEST(Coefficient, PowerWeightValuesAndGradient) {
  const auto a = Coefficient::power_weight(0.5, {0.0});
  EXPECT_DOUBLE_EQ(a.value(pt(0.25)), 0.5);
  EXPECT_DOUBLE_EQ(a.value(pt(-0.25)), 0.5);
  EXPECT_DOUBLE_EQ(a.gradient(pt(0.25))[0], 0.5 * std::pow(0.25, -0.5));
  EXPECT_DOUBLE_EQ(a.gradient(pt(-0.25))[0], -1.0);
  EXPECT_THROW(a.gradient(pt(0.0)), SingularPointError);
  EXPECT_THROW(a.value(pt(1.5)), DomainError);
  EXPECT_EQ(a.s_exponent(), ExtendedReal(2));
  EXPECT_EQ(a.r_exponent(), ExtendedReal(2));
  EXPECT_EQ(a.degenerate_points().size(), 1u);
  EXPECT_DOUBLE_EQ(a.inf(), 0.0);
  EXPECT_DOUBLE_EQ(a.sup(), 1.0);
}

TEST(Coefficient, CenterOutsideDomainHasNoSpecialPoints) {
  const auto a = Coefficient::power_weight(0.5, {-1.5, 0.0});
  EXPECT_TRUE(a.degenerate_points().empty());
  EXPECT_TRUE(a.s_exponent().is_infinite());
  EXPECT_NEAR(a.inf(), std::sqrt(0.5), 1e-15);
}

TEST(Coefficient, ConstantAndTabulated) {
  const auto c = Coefficient::constant(3.0, 2);
  EXPECT_DOUBLE_EQ(c.value(pt(0.1, -0.3)), 3.0);
  EXPECT_DOUBLE_EQ(c.gradient_norm(pt(0.1, -0.3)), 0.0);
  EXPECT_TRUE(Coefficient::constant(0.0).vanishes_identically());

  const Grid g(1, 3);
  const auto t = Coefficient::tabulated(g, {2.0, 0.0, 4.0});
  EXPECT_DOUBLE_EQ(t.value(pt(-0.5)), 1.0);
  EXPECT_DOUBLE_EQ(t.value(pt(0.5)), 2.0);
  EXPECT_EQ(t.degenerate_points().size(), 1u);
}

TEST(Density, NormalizedZeroAtZeroGradient) {
  const auto d = Density::double_phase(Coefficient::constant(1.0), 2.0, Coefficient::constant(1.0), 4.0);
  const std::vector<double> zero{0.0};
  EXPECT_EQ(d.value(pt(0.3), zero), 0.0);
  EXPECT_DOUBLE_EQ(d.raw_value(pt(0.3), zero), 2.0);
}

TEST(Density, PowerWeightDirectEvaluation) {
  const auto d = Density::power_weight(Coefficient::power_weight(0.5, {0.0}), 2.0);
  const std::vector<double> xi{1.0};
  EXPECT_DOUBLE_EQ(d.raw_value(pt(0.25), xi), 1.0);
  EXPECT_DOUBLE_EQ(d.value(pt(0.25), xi), 0.5);
  EXPECT_THROW(d.value(pt(1.25), xi), DomainError);
}

TEST(Density, RotationInvariance) {
  const auto d = elliptic_double_phase();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ang(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < 1000; ++k) {
    const auto x = pt(u(rng), u(rng));
    const std::vector<double> xi{5 * u(rng), 5 * u(rng)};
    const double th = ang(rng);
    const std::vector<double> rxi{std::cos(th) * xi[0] - std::sin(th) * xi[1],
                                  std::sin(th) * xi[0] + std::cos(th) * xi[1]};
    const double a = d.value(x, xi), b = d.value(x, rxi);
    ASSERT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST(Density, RadialProfileConvexAndNondecreasing) {
  const auto d = elliptic_double_phase();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0), t(0.0, 20.0);
  for (int k = 0; k < 1000; ++k) {
    const auto x = pt(u(rng), u(rng));
    double t1 = t(rng), t2 = t(rng);
    if (t1 > t2) std::swap(t1, t2);
    const double mid = 0.5 * (t1 + t2);
    ASSERT_GE(d.g(x, t2), d.g(x, t1));
    ASSERT_GE(0.5 * (d.g(x, t1) + d.g(x, t2)) - d.g(x, mid), -1e-10);
  }
}

TEST(HessianForm, QuadraticDensity) {
  const auto d = Density::power_weight(Coefficient::constant(1.0, 2), 2.0);
  const std::vector<double> xi{0.3, -2.0}, lam{1.5, 0.25};
  EXPECT_DOUBLE_EQ(d.hessian_form(pt(0.1, 0.2), xi, lam), 2.0 * norm2(lam));
}

TEST(HessianForm, OrthogonalDirectionGivesGtOverT) {
  const auto d = elliptic_double_phase();
  const auto x = pt(0.2, -0.4);
  const std::vector<double> xi{1.2, 0.5}, lam{-0.5, 1.2};
  const double t = std::sqrt(norm2(xi));
  EXPECT_NEAR(d.hessian_form(x, xi, lam), d.g_t(x, t) / t * norm2(lam), 1e-12 * d.hessian_form(x, xi, lam));
}

TEST(HessianForm, AgreesWithFiniteDifferenceOfGradient) {
  const auto d = elliptic_double_phase();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto x = pt(0.9 * u(rng), 0.9 * u(rng));
    std::vector<double> xi{3 * u(rng), 3 * u(rng)}, lam{u(rng), u(rng)};
    const double h = 1e-5;
    std::vector<double> xp = xi, xm = xi;
    for (int i = 0; i < 2; ++i) {
      xp[i] += h * lam[i];
      xm[i] -= h * lam[i];
    }
    const auto gp = d.xi_gradient(x, xp), gm = d.xi_gradient(x, xm);
    const double fd = ((gp[0] - gm[0]) * lam[0] + (gp[1] - gm[1]) * lam[1]) / (2 * h);
    const double exact = d.hessian_form(x, xi, lam);
    ASSERT_NEAR(fd, exact, 1e-5 * std::abs(exact));
  }
}

TEST(HessianForm, SandwichBetweenEllipticityBounds) {
  const auto d = elliptic_double_phase();
  const double L = d.ellipticity_constant();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const auto x = pt(u(rng), u(rng));
    const double scale = std::pow(10.0, 3 * u(rng));
    const std::vector<double> xi{scale * u(rng), scale * u(rng)}, lam{u(rng), u(rng)};
    const double l2 = norm2(lam), t2 = norm2(xi);
    const double form = d.hessian_form(x, xi, lam) / l2;
    ASSERT_GE(form, d.a().value(x) * std::pow(1 + t2, 0.5 * (d.p() - 2)) * (1 - 1e-12));
    ASSERT_LE(form, L * std::pow(1 + t2, 0.5 * (d.q() - 2)) * (1 + 1e-12));
  }
}

TEST(MixedDerivative, ConstantCoefficientsGiveZero) {
  const auto d = Density::double_phase(Coefficient::constant(1.0, 2), 2.0, Coefficient::constant(2.0, 2), 3.0);
  EXPECT_EQ(d.mixed_derivative_norm(pt(0.1, 0.1), std::vector<double>{1.0, 2.0}), 0.0);
  EXPECT_EQ(d.mixed_bound(pt(0.1, 0.1)), 0.0);
}

TEST(MixedDerivative, ZeroAtZeroGradient) {
  const auto d = Density::power_weight(Coefficient::power_weight(0.5, {0.0}), 2.0);
  EXPECT_EQ(d.mixed_derivative_norm(pt(0.25), std::vector<double>{0.0}), 0.0);
}

TEST(MixedDerivative, BoundedByK) {
  const auto d = elliptic_double_phase();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const auto x = pt(u(rng), u(rng));
    const double scale = std::pow(10.0, 3 * u(rng));
    const std::vector<double> xi{scale * u(rng), scale * u(rng)};
    const double bound = d.mixed_bound(x) * std::pow(1 + norm2(xi), 0.5 * (d.q() - 1));
    ASSERT_LE(d.mixed_derivative_norm(x, xi), bound * (1 + 1e-12));
  }
}

TEST(Growth, QuadraticDensityHasLowerConstantNearOne) {
  const auto d = Density::power_weight(Coefficient::constant(1.0), 2.0);
  std::vector<DensitySample> samples;
  for (int k = 0; k <= 100; ++k) samples.push_back({{0.0}, {0.1 * k}});
  const auto rep = growth_from_ellipticity(d, samples);
  EXPECT_TRUE(rep.lower_ok);
  EXPECT_TRUE(rep.upper_ok);
  EXPECT_NEAR(rep.c_lower, 1.0, 1e-12);
}

TEST(Growth, DoublePhasePassesOnRandomSamples) {
  const auto d = elliptic_double_phase();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<DensitySample> samples;
  for (int k = 0; k < 10000; ++k) {
    const double scale = std::pow(10.0, 2 * u(rng));
    samples.push_back({{u(rng), u(rng)}, {scale * u(rng), scale * u(rng)}});
  }
  samples.push_back({{0.0, 0.0}, {0.0, 0.0}});
  const auto rep = growth_from_ellipticity(d, samples);
  EXPECT_TRUE(rep.lower_ok);
  EXPECT_TRUE(rep.upper_ok) << rep.violation;
  EXPECT_EQ(rep.samples, samples.size());
}

TEST(VpMap, Examples) {
  EXPECT_EQ(v_p_map(std::vector<double>{0.0, 0.0}, 5.0), (std::vector<double>{0.0, 0.0}));
  const std::vector<double> xi{0.3, -7.0};
  EXPECT_EQ(v_p_map(xi, 2.0), xi);
  const auto v = v_p_map(std::vector<double>{1.0, 0.0}, 4.0);
  EXPECT_DOUBLE_EQ(v[0], std::sqrt(2.0));
  EXPECT_EQ(v[1], 0.0);
  EXPECT_THROW(v_p_map(xi, 1.5), PreconditionError);
}

TEST(VpRatio, Examples) {
  EXPECT_DOUBLE_EQ(vp_equivalence_ratio(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 0.0}, 4.0), 1.0);
  EXPECT_THROW(vp_equivalence_ratio(std::vector<double>{1.0}, std::vector<double>{1.0}, 3.0), DegeneratePairError);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  for (int k = 0; k < 1000; ++k) {
    const std::vector<double> a{u(rng), u(rng)}, b{u(rng), u(rng)};
    ASSERT_EQ(vp_equivalence_ratio(a, b, 2.0), 1.0);
  }
}

TEST(Regularized, AddsScaledSmoothedTerm) {
  const auto base = Density::power_weight(Coefficient::constant(1.0), 2.0);
  const auto d = Density::regularized(base, 10.0, 2.0, ExtendedReal(3));
  // sigma = 2*3/4 = 1.5
  const std::vector<double> xi{2.0};
  const double expected = base.value(pt(0.0), xi) + 0.1 * (std::pow(5.0, 0.75) - 1.0);
  EXPECT_NEAR(d.value(pt(0.0), xi), expected, 1e-14);
  EXPECT_EQ(d.family(), DensityFamily::regularized);
  ASSERT_NE(d.base(), nullptr);
}
