#pragma once

#include "pqlip/coefficient.hpp"
#include "pqlip/kernels.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pqlip {

enum class DensityFamily { power_weight, double_phase, pure_power, regularized };

std::string to_string(DensityFamily f);

/// One summand c(x) phi(|xi|^2) of a radial density.
struct DensityTerm {
  Coefficient weight;
  double exponent;
  kernels::TermSpec::Kind profile; ///< smoothed: (1+t^2)^{e/2}-1, pure: t^e
};

/// f(x, xi) = g(x, |xi|) as a finite sum of radial terms, normalized so that
/// g(x, 0) = 0. `raw_value` adds back the subtracted f(x, 0).
class Density {
public:
  /// a(x) (1+|xi|^2)^{p/2}
  static Density power_weight(Coefficient a, double p);
  /// a(x) (1+|xi|^2)^{p/2} + b(x) (1+|xi|^2)^{q/2}
  static Density double_phase(Coefficient a, double p, Coefficient b, double q);
  /// a(x) |xi|^p
  static Density pure_power(Coefficient a, double p);
  /// base + (1/h) (1+|xi|^2)^{sigma/2} with sigma = p s/(s+1).
  static Density regularized(const Density& base, double h, double p, const ExtendedReal& s);

  DensityFamily family() const { return m_family; }
  double p() const { return m_p; }
  double q() const { return m_q; }
  int dim() const { return m_dim; }
  const std::vector<DensityTerm>& terms() const { return m_terms; }
  const Coefficient& a() const { return m_terms.front().weight; }
  std::optional<Coefficient> b() const;
  double h_index() const { return m_h; }
  /// The unregularized density for family() == regularized.
  const Density* base() const { return m_base.get(); }

  // Radial profile and its t-derivatives at (x, t), t >= 0.
  double g(std::span<const double> x, double t) const;
  double g_t(std::span<const double> x, double t) const;
  double g_tt(std::span<const double> x, double t) const;

  /// f(x, xi); xi is an N x n matrix flattened in any order.
  double value(std::span<const double> x, std::span<const double> xi) const;
  double raw_value(std::span<const double> x, std::span<const double> xi) const;
  std::vector<double> xi_gradient(std::span<const double> x, std::span<const double> xi) const;
  double hessian_form(std::span<const double> x, std::span<const double> xi, std::span<const double> lam) const;
  /// Frobenius norm of the mixed derivative d^2 f / (d xi d x). xi is N x n
  /// with n = dim(), row-major.
  double mixed_derivative_norm(std::span<const double> x, std::span<const double> xi) const;

  /// k(x) = sum over terms of e |Dc(x)|, so |f_{xi x}| <= k (1+|xi|^2)^{(q-1)/2}.
  double mixed_bound(std::span<const double> x) const;
  /// Pointwise upper Hessian coefficient sum c(x) e max(1, e-1).
  double upper_coefficient(std::span<const double> x) const;
  /// L = sum sup(c) e max(1, e-1).
  double ellipticity_constant() const;
  /// inf over the domain of the lower coefficient a.
  double ellipticity_lower() const { return a().inf(); }

  std::string describe() const;

private:
  Density() = default;
  void check_point(std::span<const double> x) const;
  std::vector<double> weights(std::span<const double> x) const;

  DensityFamily m_family = DensityFamily::power_weight;
  double m_p = 2.0, m_q = 2.0, m_h = 0.0;
  int m_dim = 1;
  std::vector<DensityTerm> m_terms;
  std::shared_ptr<const Density> m_base;
};

double eval_density(const Density& d, std::span<const double> x, std::span<const double> xi);
double eval_hessian_form(const Density& d, std::span<const double> x, std::span<const double> xi,
                         std::span<const double> lam);
double eval_mixed_derivative_norm(const Density& d, std::span<const double> x, std::span<const double> xi);

struct DensitySample {
  std::vector<double> x;
  std::vector<double> xi;
};

struct GrowthReport {
  double c_lower = 0.0;      ///< largest c with c a (1+t^2)^{(p-2)/2} t^2 <= f on all samples
  bool lower_ok = true;      ///< c_lower > 0
  bool upper_ok = true;      ///< f <= B(x) (1+t^2)^{q/2} + f(x,0) on all samples
  std::size_t samples = 0;
  std::optional<DensitySample> offending;
  std::string violation;
};

/// Checks the two-sided growth bounds implied by the ellipticity bounds on
/// the given samples. Violations are reported, not thrown.
GrowthReport growth_from_ellipticity(const Density& d, std::span<const DensitySample> samples);

/// (1+|xi|^2)^{(p-2)/4} xi
std::vector<double> v_p_map(std::span<const double> xi, double p);

/// |V_p(xi)-V_p(eta)|^2 / (|xi-eta|^2 (1+|xi|^2+|eta|^2)^{(p-2)/2}).
double vp_equivalence_ratio(std::span<const double> xi, std::span<const double> eta, double p);

} // namespace pqlip
