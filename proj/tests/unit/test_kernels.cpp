#include "pqlip/energy.hpp"
#include "pqlip/kernels.hpp"
#include "pqlip/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pqlip;
using kernels::TermSpec;

namespace {

const kernels::KernelSet* vector_set() {
  return kernels::avx2_available() ? &kernels::avx2_kernels() : nullptr;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isinf(a[i]) || std::isinf(b[i])) {
      ASSERT_EQ(a[i], b[i]) << "at " << i;
      continue;
    }
    ASSERT_NEAR(a[i], b[i], rel * std::max(1.0, std::abs(a[i]))) << "at " << i;
  }
}

std::vector<double> random_vec(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

} // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_STREQ(kernels::scalar_kernels().name, "scalar");
  EXPECT_STREQ(kernels::by_name("scalar").name, "scalar");
  EXPECT_FALSE(kernels::available().empty());
  EXPECT_ANY_THROW(kernels::by_name("neon"));
}

TEST(Kernels, RadialTermsAgree) {
  const auto* vs = vector_set();
  if (!vs) GTEST_SKIP() << "AVX2 not available";
  const auto& sc = kernels::scalar_kernels();
  std::mt19937_64 rng(31);
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 1001u}) {
    // Squared gradients spanning many magnitudes, including zero.
    auto s = random_vec(n, -12.0, 8.0, rng);
    for (double& x : s) x = std::pow(10.0, x);
    s[0] = 0.0;
    const auto w = random_vec(n, 0.0, 3.0, rng);
    for (double e : {2.0, 2.5, 3.0, 4.0, 6.0}) {
      for (auto kind : {TermSpec::Kind::smoothed, TermSpec::Kind::pure}) {
        TermSpec spec{kind, e, 0.0, 0.0};
        std::vector<double> v1(n, 0.5), d11(n, 0.0), d21(n, 0.0), v2(n, 0.5), d12(n, 0.0), d22(n, 0.0);
        sc.radial_term(s.data(), w.data(), 0.0, n, spec, v1.data(), d11.data(), d21.data());
        vs->radial_term(s.data(), w.data(), 0.0, n, spec, v2.data(), d12.data(), d22.data());
        expect_close(v1, v2, 1e-12);
        expect_close(d11, d12, 1e-12);
        expect_close(d21, d22, 1e-12);
      }
    }
    TermSpec barrier{TermSpec::Kind::barrier, 2.0, 4.0, 1e-3};
    auto sb = random_vec(n, 0.0, 4.5, rng);
    std::vector<double> v1(n, 0.0), d11(n, 0.0), d21(n, 0.0), v2(n, 0.0), d12(n, 0.0), d22(n, 0.0);
    sc.radial_term(sb.data(), nullptr, 1.0, n, barrier, v1.data(), d11.data(), d21.data());
    vs->radial_term(sb.data(), nullptr, 1.0, n, barrier, v2.data(), d12.data(), d22.data());
    expect_close(v1, v2, 1e-12);
  }
}

TEST(Kernels, StencilsAgree) {
  const auto* vs = vector_set();
  if (!vs) GTEST_SKIP() << "AVX2 not available";
  const auto& sc = kernels::scalar_kernels();
  std::mt19937_64 rng(32);
  for (std::size_t n : {2u, 3u, 5u, 9u, 17u, 33u}) {
    const auto u1 = random_vec(n, -1, 1, rng);
    std::vector<double> g1(n - 1), g2(n - 1);
    sc.grad_1d(u1.data(), n - 1, 0.5 * (n - 1), g1.data());
    vs->grad_1d(u1.data(), n - 1, 0.5 * (n - 1), g2.data());
    expect_close(g1, g2, 1e-15);
    std::vector<double> o1(n), o2(n);
    sc.div_1d(g1.data(), n - 1, 0.5 * (n - 1), o1.data());
    vs->div_1d(g1.data(), n - 1, 0.5 * (n - 1), o2.data());
    expect_close(o1, o2, 1e-15);

    const auto u2 = random_vec(n * n, -1, 1, rng);
    const std::size_t nc = (n - 1) * (n - 1);
    std::vector<double> gx1(nc), gy1(nc), gx2(nc), gy2(nc);
    sc.grad_2d(u2.data(), n, n, 0.25 * (n - 1), gx1.data(), gy1.data());
    vs->grad_2d(u2.data(), n, n, 0.25 * (n - 1), gx2.data(), gy2.data());
    expect_close(gx1, gx2, 1e-14);
    expect_close(gy1, gy2, 1e-14);
    std::vector<double> d1(n * n), d2(n * n);
    sc.div_2d(gx1.data(), gy1.data(), n, n, 0.25 * (n - 1), d1.data());
    vs->div_2d(gx1.data(), gy1.data(), n, n, 0.25 * (n - 1), d2.data());
    expect_close(d1, d2, 1e-14);
  }
}

TEST(Kernels, ElementwiseAndReductionsAgree) {
  const auto* vs = vector_set();
  if (!vs) GTEST_SKIP() << "AVX2 not available";
  const auto& sc = kernels::scalar_kernels();
  std::mt19937_64 rng(33);
  for (std::size_t n : {1u, 5u, 31u, 32u, 33u, 129u, 4097u}) {
    const auto a = random_vec(n, -2, 2, rng), b = random_vec(n, -2, 2, rng), c = random_vec(n, 0, 2, rng);
    std::vector<double> s1(n), s2(n);
    sc.sum_squares(a.data(), n, false, s1.data());
    vs->sum_squares(a.data(), n, false, s2.data());
    expect_close(s1, s2, 1e-15);
    sc.sum_squares(b.data(), n, true, s1.data());
    vs->sum_squares(b.data(), n, true, s2.data());
    expect_close(s1, s2, 1e-15);
    sc.scaled_product(a.data(), b.data(), 0.3, n, s1.data());
    vs->scaled_product(a.data(), b.data(), 0.3, n, s2.data());
    expect_close(s1, s2, 1e-15);
    sc.dot_accumulate(a.data(), b.data(), n, false, s1.data());
    vs->dot_accumulate(a.data(), b.data(), n, false, s2.data());
    expect_close(s1, s2, 1e-15);
    sc.hess_flux(c.data(), b.data(), a.data(), b.data(), c.data(), 0.7, n, s1.data());
    vs->hess_flux(c.data(), b.data(), a.data(), b.data(), c.data(), 0.7, n, s2.data());
    expect_close(s1, s2, 1e-14);
    const double p1 = sc.pairwise_sum(a.data(), n), p2 = vs->pairwise_sum(a.data(), n);
    double abs_sum = 0.0;
    for (double x : a) abs_sum += std::abs(x);
    ASSERT_NEAR(p1, p2, 1e-14 * abs_sum);
  }
}

TEST(Kernels, PairwiseSumIsDeterministic) {
  std::mt19937_64 rng(34);
  const auto a = random_vec(100003, -1, 1, rng);
  const auto& ks = kernels::active();
  const double first = ks.pairwise_sum(a.data(), a.size());
  for (int k = 0; k < 5; ++k) ASSERT_EQ(ks.pairwise_sum(a.data(), a.size()), first);
}

TEST(Kernels, EnergiesAndSolvesAgreeAcrossSets) {
  const auto* vs = vector_set();
  if (!vs) GTEST_SKIP() << "AVX2 not available";
  const auto d = Density::double_phase(Coefficient::power_weight(0.5, {-1.0, 0.0}), 2.0, Coefficient::constant(1.0, 2),
                                       2.5);
  const Grid g(2, 33);
  const auto bc = BoundaryData::quadratic(0.0, {1.0, 0.5}, {1.0, 0.2, 0.2, -0.5}, 2);
  const DiscreteField u0 = bc.sample(g);
  const DiscreteEnergy es(d, g, 1, kernels::scalar_kernels()), ev(d, g, 1, *vs);
  DiscreteField gs(g, 1), gv(g, 1);
  const double Es = es.value_and_gradient(u0, gs), Ev = ev.value_and_gradient(u0, gv);
  EXPECT_NEAR(Es, Ev, 1e-12 * std::abs(Es));
  expect_close(gs.values(), gv.values(), 1e-12);

  SolveOptions so, vo;
  so.kernels = &kernels::scalar_kernels();
  vo.kernels = vs;
  const auto rs = minimize(d, g, bc, so), rv = minimize(d, g, bc, vo);
  EXPECT_NEAR(rs.report.energy, rv.report.energy, 1e-12 * std::abs(rs.report.energy));
  for (std::size_t i = 0; i < rs.field.values().size(); ++i)
    ASSERT_NEAR(rs.field.values()[i], rv.field.values()[i], 1e-8);
}
