#include "pqlip/diagnostics.hpp"

#include "pqlip/errors.hpp"
#include "pqlip/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace pqlip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double to_t(const ExtendedReal& e) { return e.is_infinite() ? kInf : e.to_double(); }

bool point_in_closed_region(const std::vector<double>& pt, const Region& region) {
  return point_in_region(std::span<const double>(pt), region);
}

std::string format_point(const std::vector<double>& pt) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < pt.size(); ++i) os << (i ? ", " : "") << pt[i];
  os << ")";
  return os.str();
}

void require_inverse_integrable(const Coefficient& a, const ExtendedReal& s, const Region& region,
                                const char* name) {
  if (a.vanishes_identically())
    throw DivergenceError(std::string("||") + name + "^{-1}||_{L^s} diverges: the coefficient vanishes identically");
  for (const auto& pt : a.degenerate_points()) {
    if (!point_in_closed_region(pt, region)) continue;
    if (s >= a.s_exponent())
      throw DivergenceError(std::string("||") + name + "^{-1}||_{L^" + s.to_string() + "} diverges at " +
                            format_point(pt) + " (critical exponent " + a.s_exponent().to_string() + ")");
  }
}

void require_k_integrable(const Density& d, const ExtendedReal& r, const Region& region) {
  for (const auto& term : d.terms()) {
    if (term.weight.is_constant()) continue;
    for (const auto& pt : term.weight.singular_points()) {
      if (!point_in_closed_region(pt, region)) continue;
      if (r >= term.weight.r_exponent())
        throw DivergenceError("||k||_{L^" + r.to_string() + "} diverges at " + format_point(pt) +
                              " (critical exponent " + term.weight.r_exponent().to_string() + ")");
    }
  }
}

/// Visits every cell as (centre, cell index i, j, local index in a cell array).
template <class F> void for_each_cell(const Grid& g, F&& f) {
  const std::size_t nc = g.n_cells();
  const std::size_t ny = g.dim() == 2 ? nc : 1;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nc; ++i) {
      double x[2] = {g.cell_center(i), g.dim() == 2 ? g.cell_center(j) : 0.0};
      f(std::span<const double>(x, g.dim()), i, j, j * nc + i);
    }
}

std::vector<double> cell_gradient_at(const CellArray& grads, std::size_t i, std::size_t j) {
  std::vector<double> xi(grads.width());
  for (std::size_t k = 0; k < xi.size(); ++k) xi[k] = grads.at(k, i, j);
  return xi;
}

double safe_ratio(double lhs, double rhs) {
  if (rhs == 0.0) return lhs == 0.0 ? 0.0 : kInf;
  return lhs / rhs;
}

void require_certificate(const DiscreteField& u) {
  if (!u.certificate()) throw PreconditionError("field is not a certified minimizer");
  if (!u.is_full()) throw PreconditionError("estimate checks need a field on the full grid");
}

/// sum over cells in `region` of vol (1 + f(x, Du)).
double energy_integral(const DiscreteField& u, const Density& d, const CellArray& grads, const Region& region) {
  const Grid& g = u.grid();
  std::vector<double> terms;
  for_each_cell(g, [&](std::span<const double> x, std::size_t i, std::size_t j, std::size_t) {
    if (!region.contains(x)) return;
    const auto xi = cell_gradient_at(grads, i, j);
    terms.push_back(1.0 + d.value(x, xi));
  });
  return g.cell_volume() * pairwise_sum(terms);
}

} // namespace

std::string to_string(EstimateId id) {
  switch (id) {
  case EstimateId::fin: return "fin";
  case EstimateId::hdfin: return "hdfin";
  case EstimateId::hd6: return "hd6";
  case EstimateId::sob: return "sob";
  case EstimateId::ladder: return "ladder";
  case EstimateId::lavrentiev: return "lavrentiev";
  }
  return "unknown";
}

double EstimateReport::component(const std::string& name) const {
  for (const auto& c : rhs_components)
    if (c.name == name) return c.value;
  throw IndexError("no right-hand-side component named " + name);
}

KConstant compute_K(const Density& d, const ExponentProfile& profile, const Grid& grid, const Region& region,
                    KVariant variant) {
  if (grid.dim() != d.dim()) throw PreconditionError("grid and density dimensions differ");
  const ExtendedReal& r = profile.r();
  const ExtendedReal& s = profile.s();
  const Coefficient& a = d.a();
  require_inverse_integrable(a, s, region, "a");
  require_k_integrable(d, r, region);

  KConstant K;
  K.variant = variant;
  K.inv_a_norm = cell_norm(grid, region, to_t(s), [&](std::span<const double> x) { return 1.0 / a.value(x); });
  if (variant == KVariant::main) {
    K.k_norm = cell_norm(grid, region, to_t(r), [&](std::span<const double> x) { return d.mixed_bound(x); });
    K.value = 1.0 + K.inv_a_norm * K.k_norm * K.k_norm;
    return K;
  }
  const auto b = d.b();
  K.k_norm = cell_norm(grid, region, to_t(r), [&](std::span<const double> x) {
    return d.mixed_bound(x) + (b ? b->value(x) : 0.0);
  });
  // rs/(2s+r) through its reciprocal 2/r + 1/s.
  const ExtendedReal inv_t = ExtendedReal(2) * r.reciprocal() + s.reciprocal();
  K.a_norm = cell_norm(grid, region, to_t(inv_t.reciprocal()), [&](std::span<const double> x) { return a.value(x); });
  K.value = 1.0 + K.inv_a_norm * K.k_norm * K.k_norm + K.a_norm;
  return K;
}

EstimateReport check_lipschitz_estimate(const DiscreteField& u, const Density& d, const ExponentProfile& profile,
                                        double R0, double theta) {
  require_certificate(u);
  if (!(R0 > 0.0 && R0 <= 1.0)) throw PreconditionError("outer radius must lie in (0, 1]");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw PreconditionError("theta must be positive and finite");
  const Grid& g = u.grid();
  const CellArray grads = discrete_gradient(u);
  const Region outer{R0};
  const Region inner{0.5 * R0};

  double lhs = 0.0;
  for_each_cell(g, [&](std::span<const double> x, std::size_t i, std::size_t j, std::size_t) {
    if (inner.contains(x)) lhs = std::max(lhs, grads.magnitude(i, j));
  });

  const KConstant K = compute_K(d, profile, g, outer, KVariant::main);
  const double I = energy_integral(u, d, grads, outer);

  EstimateReport rep;
  rep.id = EstimateId::fin;
  rep.lhs = lhs;
  rep.rhs_components = {{"K_main", K.value}, {"inv_a_norm", K.inv_a_norm}, {"k_norm", K.k_norm},
                        {"energy_integral", I}, {"theta", theta}};
  rep.rhs = std::pow(K.value, theta) * std::pow(I, theta);
  rep.ratio = safe_ratio(lhs, rep.rhs);
  rep.outer_radius = R0;
  rep.inner_radius = 0.5 * R0;
  rep.profile_class = to_string(profile.classify());
  return rep;
}

EstimateReport check_second_derivative_estimate(const DiscreteField& u, const Density& d,
                                                const ExponentProfile& profile, double R0, double theta) {
  require_certificate(u);
  if (!(R0 > 0.0 && R0 <= 1.0)) throw PreconditionError("outer radius must lie in (0, 1]");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw PreconditionError("theta must be positive and finite");
  const Grid& g = u.grid();
  const int dim = g.dim();
  const CellArray grads = discrete_gradient(u);
  const LatticeArray d2 = discrete_second_differences(u);
  const Region outer{R0};
  const Region inner{0.5 * R0};
  const double p = d.p();
  const std::size_t width = grads.width();

  std::vector<double> terms;
  d2.for_each([&](std::size_t i, std::size_t j, std::size_t l) {
    const auto pt = d2.point(i, j);
    const std::span<const double> x(pt.data(), dim);
    if (!inner.contains(x)) return;
    // Node gradient: average of the 2^dim adjacent cells.
    double du2 = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      double acc = grads.at(k, i - 1, dim == 2 ? j - 1 : 0) + grads.at(k, i, dim == 2 ? j - 1 : 0);
      if (dim == 2) acc += grads.at(k, i - 1, j) + grads.at(k, i, j);
      acc /= dim == 2 ? 4.0 : 2.0;
      du2 += acc * acc;
    }
    double hess2 = 0.0;
    for (std::size_t k = 0; k < d2.width(); ++k) {
      const double v = d2.values()[k * d2.points() + l];
      hess2 += v * v;
    }
    terms.push_back(d.a().value(x) * std::pow(1.0 + du2, 0.5 * (p - 2.0)) * hess2);
  });
  const double lhs = g.cell_volume() * pairwise_sum(terms);

  const KConstant K = compute_K(d, profile, g, outer, KVariant::main);
  const double I = energy_integral(u, d, grads, outer);

  EstimateReport rep;
  rep.id = EstimateId::hdfin;
  rep.lhs = lhs;
  rep.rhs_components = {{"K_main", K.value}, {"inv_a_norm", K.inv_a_norm}, {"k_norm", K.k_norm},
                        {"energy_integral", I}, {"theta", theta}};
  rep.rhs = std::pow(K.value, theta) * std::pow(I, theta);
  rep.ratio = safe_ratio(lhs, rep.rhs);
  rep.outer_radius = R0;
  rep.inner_radius = 0.5 * R0;
  rep.profile_class = to_string(profile.classify());
  return rep;
}

EstimateReport check_higher_diff_estimate(const DiscreteField& u, const Density& d, double rho, double R) {
  if (!u.is_full()) throw PreconditionError("estimate checks need a field on the full grid");
  if (!(d.a().inf() > 0.0)) throw PreconditionError("higher differentiability check needs inf a > 0");
  if (!(rho > 0.0 && rho < R && 2.0 * R <= 1.0 + 1e-12))
    throw PreconditionError("higher differentiability check needs 0 < rho < R and 2R <= 1");
  const Grid& g = u.grid();
  const int dim = g.dim();
  const double p = d.p();
  const double q = d.q();
  const CellArray grads = discrete_gradient(u);

  LatticeArray vp(g, grads.stagger(), grads.box(), grads.width());
  grads.for_each([&](std::size_t i, std::size_t j, std::size_t l) {
    const auto v = v_p_map(cell_gradient_at(grads, i, j), p);
    for (std::size_t k = 0; k < v.size(); ++k) vp.values()[k * vp.points() + l] = v[k];
  });
  const LatticeArray dvp = lattice_gradient(vp);

  const Region ball_rho{rho};
  const Region ball_R{R};
  const Region ball_2R{2.0 * R};

  std::vector<double> lhs_terms;
  dvp.for_each([&](std::size_t i, std::size_t j, std::size_t) {
    const auto pt = dvp.point(i, j);
    if (!ball_rho.contains(std::span<const double>(pt.data(), dim))) return;
    const double m = dvp.magnitude(i, j);
    lhs_terms.push_back(m * m);
  });
  const double lhs = g.cell_volume() * pairwise_sum(lhs_terms);

  double S = 1.0;
  std::vector<double> du2, dup, k2, kp;
  const double kexp = p / (p - 1.0);
  for_each_cell(g, [&](std::span<const double> x, std::size_t i, std::size_t j, std::size_t) {
    if (ball_2R.contains(x)) {
      const double m = grads.magnitude(i, j);
      S = std::max(S, 1.0 + m);
      du2.push_back(m * m);
      dup.push_back(std::pow(m, p));
    }
    if (ball_R.contains(x)) {
      const double k = d.mixed_bound(x);
      k2.push_back(k * k);
      kp.push_back(std::pow(k, kexp));
    }
  });
  const double vol = g.cell_volume();
  const double int_du2 = vol * pairwise_sum(du2);
  const double int_dup = vol * pairwise_sum(dup);
  const double int_k2 = vol * pairwise_sum(k2);
  const double int_kp = vol * pairwise_sum(kp);

  const double gap = R - rho;
  const double A1 = std::pow(S, 2.0 * q - p) * int_du2 / (gap * gap);
  const double A2 = std::pow(S, 2.0 * q - p) * int_k2;
  const double A3 = std::pow(S, q - 1.0) * std::pow(int_kp, 1.0 / kexp) * std::pow(int_dup, 1.0 / p);

  EstimateReport rep;
  rep.id = EstimateId::hd6;
  rep.lhs = lhs;
  rep.rhs_components = {{"S", S},         {"int_Du2", int_du2}, {"int_k2", int_k2}, {"int_kp", int_kp},
                        {"int_Dup", int_dup}, {"A1", A1},         {"A2", A2},         {"A3", A3}};
  rep.rhs = A1 + A2 + A3;
  rep.ratio = safe_ratio(lhs, rep.rhs);
  rep.outer_radius = 2.0 * R;
  rep.inner_radius = rho;
  return rep;
}

EstimateReport weighted_sobolev_check(const DiscreteField& w, const Coefficient& lam, double p,
                                      const ExtendedReal& s) {
  if (!w.is_full()) throw PreconditionError("Sobolev check needs a field on the full grid");
  if (!(p >= 1.0) || !std::isfinite(p)) throw PreconditionError("Sobolev check needs a finite p >= 1");
  if (!(s >= ExtendedReal(1))) throw PreconditionError("Sobolev check needs s >= 1");
  const Grid& g = w.grid();
  if (lam.dim() != g.dim()) throw PreconditionError("weight and grid dimensions differ");
  w.for_each([&](std::size_t i, std::size_t j, std::size_t l) {
    if (!w.is_boundary(i, j)) return;
    for (std::size_t k = 0; k < w.components(); ++k)
      if (w.values()[k * w.points() + l] != 0.0)
        throw PreconditionError("Sobolev check needs w = 0 on the boundary");
  });
  const Region whole{1.0};
  require_inverse_integrable(lam, s, whole, "lambda");

  const ExtendedReal pe = ExtendedReal::from_double(p);
  const ExtendedReal sigma = s.is_infinite() ? pe : pe * s / (s + ExtendedReal(1));
  const ExtendedReal conj = sobolev_conjugate(sigma, g.dim());
  const double t = to_t(conj);
  const double wnorm = norm_lt(w, t);
  const double lhs = std::pow(wnorm, p);

  const double inv = cell_norm(g, whole, to_t(s), [&](std::span<const double> x) { return 1.0 / lam.value(x); });
  const CellArray grads = discrete_gradient(w);
  std::vector<double> terms;
  for_each_cell(g, [&](std::span<const double> x, std::size_t i, std::size_t j, std::size_t) {
    terms.push_back(lam.value(x) * std::pow(grads.magnitude(i, j), p));
  });
  const double weighted = g.cell_volume() * pairwise_sum(terms);

  EstimateReport rep;
  rep.id = EstimateId::sob;
  rep.lhs = lhs;
  rep.rhs_components = {{"inv_lambda_norm", inv}, {"weighted_energy", weighted}, {"sigma", sigma.to_double()},
                        {"conjugate", t}};
  rep.rhs = inv * weighted;
  rep.ratio = safe_ratio(lhs, rep.rhs);
  rep.outer_radius = 1.0;
  rep.inner_radius = 1.0;
  return rep;
}

MoserReport ladder_norms(const DiscreteField& u, std::span<const double> exponents, const Region& region) {
  if (!u.is_full()) throw PreconditionError("ladder norms need a field on the full grid");
  const Grid& g = u.grid();
  const CellArray grads = discrete_gradient(u);
  // log (1+|Du|^2)^{1/2} per cell
  std::vector<double> logs;
  for_each_cell(g, [&](std::span<const double> x, std::size_t i, std::size_t j, std::size_t) {
    if (!region.contains(x)) return;
    const double m = grads.magnitude(i, j);
    logs.push_back(0.5 * std::log1p(m * m));
  });
  if (logs.empty()) throw PreconditionError("ladder region contains no cells");

  MoserReport rep;
  rep.exponents.assign(exponents.begin(), exponents.end());
  const double lmax = *std::max_element(logs.begin(), logs.end());
  rep.sup = std::exp(lmax);
  const double log_n = std::log(static_cast<double>(logs.size()));
  std::vector<double> shifted(logs.size());
  for (double pi : exponents) {
    if (!(pi > 0.0)) throw PreconditionError("ladder exponents must be positive");
    for (std::size_t c = 0; c < logs.size(); ++c) shifted[c] = std::exp(pi * (logs[c] - lmax));
    const double lme = pi * lmax + std::log(pairwise_sum(shifted)) - log_n;
    rep.norms.push_back(std::exp(lme / pi));
  }
  for (std::size_t i = 0; i < rep.norms.size(); ++i) {
    if (!std::isfinite(rep.norms[i])) rep.finite = false;
    if (i > 0 && rep.norms[i] < rep.norms[i - 1] * (1.0 - 1e-13)) {
      rep.monotone = false;
      ++rep.violations;
    }
  }
  if (!std::isfinite(rep.sup)) rep.finite = false;
  rep.final_gap = rep.norms.empty() ? 0.0 : (rep.sup - rep.norms.back()) / rep.sup;
  return rep;
}

MoserReport moser_norm_ladder_check(const DiscreteField& u, const ExponentProfile& profile, std::size_t i_max,
                                    const Region& region) {
  require_certificate(u);
  const MoserLadder ladder = moser_ladder(profile.p(), profile.n(), profile.r(), profile.s(), i_max);
  MoserReport rep = ladder_norms(u, ladder.exponents, region);
  rep.conjugate_unbounded = ladder.conjugate_unbounded;
  return rep;
}

LavrentievReport lavrentiev_probe(const Density& d, const std::vector<std::size_t>& grid_nodes,
                                  const BoundaryData& bc, const std::vector<double>& caps,
                                  const SolveOptions& opts) {
  if (grid_nodes.empty() || caps.empty()) throw PreconditionError("Lavrentiev probe needs grids and caps");
  LavrentievReport rep;
  rep.grids = grid_nodes;
  rep.caps = caps;
  std::sort(rep.caps.begin(), rep.caps.end());
  rep.gap_flag = true;
  for (std::size_t n : grid_nodes) {
    const Grid grid(bc.dim(), n);
    const double unres = minimize(d, grid, bc, opts).report.energy;
    std::vector<double> row;
    for (double cap : rep.caps) row.push_back(minimize_capped(d, grid, bc, cap, opts).energy);
    bool dec = true;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[c - 1] + 1e-9 * std::max(1.0, std::abs(row[c - 1]))) dec = false;
    const double excess = (row.back() - unres) / std::max(std::abs(unres), 1e-300);
    rep.unrestricted.push_back(unres);
    rep.capped.push_back(std::move(row));
    rep.excess.push_back(excess);
    rep.decreasing_in_cap.push_back(dec);
    if (!(excess > kLavrentievTolerance)) rep.gap_flag = false;
  }
  return rep;
}

std::pair<double, double> hole_filling_constants(double theta, double beta) {
  if (!(theta > 0.0 && theta < 1.0)) throw PreconditionError("hole filling needs 0 < theta < 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw PreconditionError("hole filling needs beta > 0");
  const double tau = std::pow(2.0 * theta / (1.0 + theta), 1.0 / beta);
  const double cA = std::pow(1.0 - tau, -beta) / (1.0 - theta * std::pow(tau, -beta));
  const double cB = 1.0 / (1.0 - theta);
  return {cA, cB};
}

HoleFillingReport hole_filling_check(std::span<const double> radii, std::span<const double> h, double theta,
                                     double A, double B, double beta) {
  if (radii.size() != h.size() || radii.empty()) throw PreconditionError("radii and samples must match");
  if (!(A >= 0.0) || !(B >= 0.0)) throw PreconditionError("hole filling needs A, B >= 0");
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!(h[i] >= 0.0) || !std::isfinite(h[i]) || !std::isfinite(radii[i]))
      throw PreconditionError("hole filling samples must be finite and h nonnegative");
  HoleFillingReport rep;
  std::tie(rep.c_A, rep.c_B) = hole_filling_constants(theta, beta);

  const std::size_t n = radii.size();
  for (std::size_t i = 0; i < n && rep.hypothesis_ok; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!(radii[i] < radii[j])) continue;
      const double bound = theta * h[j] + A / std::pow(radii[j] - radii[i], beta) + B;
      if (h[i] > bound * (1.0 + 1e-12)) {
        rep.hypothesis_ok = false;
        rep.conclusion_ok = false;
        rep.offending = std::make_pair(radii[i], radii[j]);
        std::ostringstream os;
        os << "hypothesis fails for s = " << radii[i] << ", t = " << radii[j] << ": h(s) = " << h[i] << " > "
           << bound;
        rep.violation = os.str();
        break;
      }
    }
  if (!rep.hypothesis_ok) return rep;

  const double R0 = *std::max_element(radii.begin(), radii.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(radii[i] < R0)) continue;
    const double bound = rep.c_A * A / std::pow(R0 - radii[i], beta) + rep.c_B * B;
    const double ratio = safe_ratio(h[i], bound);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (h[i] > bound * (1.0 + 1e-12) && rep.conclusion_ok) {
      rep.conclusion_ok = false;
      rep.offending = std::make_pair(radii[i], R0);
      std::ostringstream os;
      os << "conclusion fails at r = " << radii[i] << ": h(r) = " << h[i] << " > " << bound;
      rep.violation = os.str();
    }
  }
  return rep;
}

} // namespace pqlip
