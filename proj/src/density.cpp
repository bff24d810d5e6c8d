#include "pqlip/density.hpp"

#include "pqlip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pqlip {
namespace {

using Kind = kernels::TermSpec::Kind;

struct Radial {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

Radial eval_term(const DensityTerm& term, double w, double s) {
  kernels::TermSpec spec;
  spec.kind = term.profile;
  spec.exponent = term.exponent;
  Radial r;
  kernels::scalar_kernels().radial_term(&s, nullptr, w, 1, spec, &r.v, &r.d1, &r.d2);
  return r;
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

void require_exponent(double p, const char* name) {
  if (!std::isfinite(p) || p < 2.0) throw PreconditionError(std::string(name) + " must be a finite real >= 2");
}

} // namespace

std::string to_string(DensityFamily f) {
  switch (f) {
    case DensityFamily::power_weight: return "power_weight";
    case DensityFamily::double_phase: return "double_phase";
    case DensityFamily::pure_power: return "pure_power";
    case DensityFamily::regularized: return "regularized";
  }
  return "?";
}

Density Density::power_weight(Coefficient a, double p) {
  require_exponent(p, "p");
  Density d;
  d.m_family = DensityFamily::power_weight;
  d.m_p = d.m_q = p;
  d.m_dim = a.dim();
  d.m_terms.push_back({std::move(a), p, Kind::smoothed});
  return d;
}

Density Density::double_phase(Coefficient a, double p, Coefficient b, double q) {
  require_exponent(p, "p");
  require_exponent(q, "q");
  if (q < p) throw PreconditionError("double phase density needs q >= p");
  if (a.dim() != b.dim()) throw PreconditionError("coefficients a and b live in different dimensions");
  Density d;
  d.m_family = DensityFamily::double_phase;
  d.m_p = p;
  d.m_q = q;
  d.m_dim = a.dim();
  d.m_terms.push_back({std::move(a), p, Kind::smoothed});
  d.m_terms.push_back({std::move(b), q, Kind::smoothed});
  return d;
}

Density Density::pure_power(Coefficient a, double p) {
  require_exponent(p, "p");
  Density d;
  d.m_family = DensityFamily::pure_power;
  d.m_p = d.m_q = p;
  d.m_dim = a.dim();
  d.m_terms.push_back({std::move(a), p, Kind::pure});
  return d;
}

Density Density::regularized(const Density& base, double h, double p, const ExtendedReal& s) {
  if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("regularization index h must be finite and > 0");
  require_exponent(p, "p");
  if (s.is_finite() && s < ExtendedReal(1)) throw PreconditionError("regularization exponent s must be >= 1");
  const double sigma = s.is_infinite() ? p : (ExtendedReal::from_double(p) * s / (s + ExtendedReal(1))).to_double();
  Density d = base;
  d.m_family = DensityFamily::regularized;
  d.m_h = h;
  d.m_q = std::max(base.m_q, sigma);
  d.m_terms.push_back({Coefficient::constant(1.0 / h, base.m_dim), sigma, Kind::smoothed});
  d.m_base = std::make_shared<const Density>(base);
  return d;
}

std::optional<Coefficient> Density::b() const {
  if (m_family == DensityFamily::double_phase) return m_terms[1].weight;
  if (m_family == DensityFamily::regularized && m_base) return m_base->b();
  return std::nullopt;
}

void Density::check_point(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(m_dim))
    throw DomainError("point dimension does not match the density");
  for (double v : x)
    if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) throw DomainError("point outside [-1,1]^n");
}

std::vector<double> Density::weights(std::span<const double> x) const {
  check_point(x);
  std::vector<double> w;
  w.reserve(m_terms.size());
  for (const auto& t : m_terms) w.push_back(t.weight.value(x));
  return w;
}

double Density::g(std::span<const double> x, double t) const {
  const auto w = weights(x);
  double v = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k) v += eval_term(m_terms[k], w[k], t * t).v;
  return v;
}

double Density::g_t(std::span<const double> x, double t) const {
  const auto w = weights(x);
  double d1 = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k) d1 += eval_term(m_terms[k], w[k], t * t).d1;
  return t == 0.0 ? 0.0 : d1 * t;
}

double Density::g_tt(std::span<const double> x, double t) const {
  const auto w = weights(x);
  double acc = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k) {
    const Radial r = eval_term(m_terms[k], w[k], t * t);
    acc += r.d1 + (t == 0.0 ? 0.0 : r.d2 * t * t);
  }
  return acc;
}

double Density::value(std::span<const double> x, std::span<const double> xi) const {
  for (double v : xi)
    if (!std::isfinite(v)) throw PreconditionError("gradient argument is not finite");
  return g(x, std::sqrt(squared_norm(xi)));
}

double Density::raw_value(std::span<const double> x, std::span<const double> xi) const {
  const auto w = weights(x);
  double at_zero = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k)
    if (m_terms[k].profile == Kind::smoothed) at_zero += w[k];
  return value(x, xi) + at_zero;
}

std::vector<double> Density::xi_gradient(std::span<const double> x, std::span<const double> xi) const {
  const auto w = weights(x);
  const double s = squared_norm(xi);
  double d1 = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k) d1 += eval_term(m_terms[k], w[k], s).d1;
  std::vector<double> out(xi.begin(), xi.end());
  if (s == 0.0) return std::vector<double>(xi.size(), 0.0);
  for (double& v : out) v *= d1;
  return out;
}

double Density::hessian_form(std::span<const double> x, std::span<const double> xi,
                             std::span<const double> lam) const {
  if (xi.size() != lam.size()) throw PreconditionError("xi and lambda have different shapes");
  const auto w = weights(x);
  const double s = squared_norm(xi);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k) {
    const Radial r = eval_term(m_terms[k], w[k], s);
    d1 += r.d1;
    d2 += r.d2;
  }
  const double lam2 = squared_norm(lam);
  if (s == 0.0) return d1 * lam2; // g_tt(x,0) |lambda|^2
  double dot = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) dot += xi[i] * lam[i];
  return d1 * lam2 + d2 * dot * dot;
}

double Density::mixed_derivative_norm(std::span<const double> x, std::span<const double> xi) const {
  check_point(x);
  if (xi.size() % static_cast<std::size_t>(m_dim) != 0)
    throw PreconditionError("xi must be an N x n matrix with n the spatial dimension");
  const double s = squared_norm(xi);
  // f_xi = (sum_k c_k(x) u_k(s)) xi with u_k the unit-weight d1, so
  // f_{xi x} = xi (x) sum_k u_k(s) Dc_k(x).
  std::vector<double> m(m_dim, 0.0);
  for (const auto& term : m_terms) {
    if (term.weight.is_constant()) continue;
    const auto dc = term.weight.gradient(x);
    const double u = eval_term(term, 1.0, s).d1;
    for (int j = 0; j < m_dim; ++j) m[j] += u * dc[j];
  }
  return std::sqrt(s) * std::sqrt(squared_norm(m));
}

double Density::mixed_bound(std::span<const double> x) const {
  check_point(x);
  double k = 0.0;
  for (const auto& term : m_terms) {
    if (term.weight.is_constant()) continue;
    k += term.exponent * term.weight.gradient_norm(x);
  }
  return k;
}

double Density::upper_coefficient(std::span<const double> x) const {
  const auto w = weights(x);
  double acc = 0.0;
  for (std::size_t k = 0; k < m_terms.size(); ++k) {
    const double e = m_terms[k].exponent;
    acc += w[k] * e * std::max(1.0, e - 1.0);
  }
  return acc;
}

double Density::ellipticity_constant() const {
  double acc = 0.0;
  for (const auto& term : m_terms) {
    const double e = term.exponent;
    acc += term.weight.sup() * e * std::max(1.0, e - 1.0);
  }
  return acc;
}

std::string Density::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (m_family == DensityFamily::regularized && m_base) {
    os << "regularized(" << m_base->describe() << ", h=" << m_h << ", sigma=" << m_terms.back().exponent << ")";
    return os.str();
  }
  os << to_string(m_family) << "(a=" << m_terms[0].weight.describe() << ", p=" << m_p;
  if (m_family == DensityFamily::double_phase) os << ", b=" << m_terms[1].weight.describe() << ", q=" << m_q;
  os << ")";
  return os.str();
}

double eval_density(const Density& d, std::span<const double> x, std::span<const double> xi) {
  return d.value(x, xi);
}

double eval_hessian_form(const Density& d, std::span<const double> x, std::span<const double> xi,
                         std::span<const double> lam) {
  return d.hessian_form(x, xi, lam);
}

double eval_mixed_derivative_norm(const Density& d, std::span<const double> x, std::span<const double> xi) {
  return d.mixed_derivative_norm(x, xi);
}

GrowthReport growth_from_ellipticity(const Density& d, std::span<const DensitySample> samples) {
  GrowthReport rep;
  rep.c_lower = std::numeric_limits<double>::infinity();
  const double p = d.p(), q = d.q();
  for (const auto& smp : samples) {
    ++rep.samples;
    const double t2 = squared_norm(smp.xi);
    const double f = d.value(smp.x, smp.xi);
    const double a = d.a().value(smp.x);
    const double lower = a * std::pow(1.0 + t2, 0.5 * (p - 2.0)) * t2;
    if (lower > 0.0) {
      const double c = f / lower;
      if (c < rep.c_lower) {
        rep.c_lower = c;
        if (!(c > 0.0) && rep.lower_ok) {
          rep.lower_ok = false;
          rep.offending = smp;
          rep.violation = "lower growth bound fails for every c > 0";
        }
      }
    }
    const double upper = d.upper_coefficient(smp.x) * std::pow(1.0 + t2, 0.5 * q);
    if (f > upper * (1.0 + 1e-12) && rep.upper_ok) {
      rep.upper_ok = false;
      if (rep.lower_ok) {
        rep.offending = smp;
        rep.violation = "upper growth bound exceeded";
      }
    }
  }
  return rep;
}

std::vector<double> v_p_map(std::span<const double> xi, double p) {
  if (!(p >= 2.0)) throw PreconditionError("V_p is defined here for p >= 2");
  const double f = std::pow(1.0 + squared_norm(xi), 0.25 * (p - 2.0));
  std::vector<double> out(xi.begin(), xi.end());
  for (double& v : out) v *= f;
  return out;
}

double vp_equivalence_ratio(std::span<const double> xi, std::span<const double> eta, double p) {
  if (xi.size() != eta.size()) throw PreconditionError("xi and eta have different shapes");
  double diff2 = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) diff2 += (xi[i] - eta[i]) * (xi[i] - eta[i]);
  if (diff2 == 0.0) throw DegeneratePairError("xi and eta coincide");
  const auto vx = v_p_map(xi, p);
  const auto ve = v_p_map(eta, p);
  double num = 0.0;
  for (std::size_t i = 0; i < vx.size(); ++i) num += (vx[i] - ve[i]) * (vx[i] - ve[i]);
  const double weight = std::pow(1.0 + squared_norm(xi) + squared_norm(eta), 0.5 * (p - 2.0));
  return num / (diff2 * weight);
}

} // namespace pqlip
