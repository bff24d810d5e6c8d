#pragma once

#include "pqlip/density.hpp"
#include "pqlip/exponents.hpp"
#include "pqlip/grid.hpp"
#include "pqlip/operators.hpp"
#include "pqlip/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pqlip {

enum class EstimateId { fin, hdfin, hd6, sob, ladder, lavrentiev };

std::string to_string(EstimateId id);

struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct EstimateReport {
  EstimateId id = EstimateId::fin;
  double lhs = 0.0;
  std::vector<NamedValue> rhs_components;
  double rhs = 0.0;   ///< the combination of components the ratio divides by
  double ratio = 0.0; ///< lhs / rhs
  double outer_radius = 1.0;
  double inner_radius = 0.5;
  std::string profile_class;

  double component(const std::string& name) const;
};

enum class KVariant { main, apriori };

struct KConstant {
  KVariant variant = KVariant::main;
  double value = 1.0;
  double inv_a_norm = 0.0; ///< ||a^{-1}||_{L^s}
  double k_norm = 0.0;     ///< ||k||_{L^r} (main) or ||k+b||_{L^r} (apriori)
  double a_norm = 0.0;     ///< ||a||_{L^{rs/(2s+r)}} (apriori only)
};

/// Midpoint-rule K constant over the sub-square `region`, using the
/// density's a, b and mixed-derivative bound k sampled at the cell centres
/// of `grid`. Throws DivergenceError when the coefficient metadata says a
/// factor is infinite on the region.
KConstant compute_K(const Density& d, const ExponentProfile& profile, const Grid& grid, const Region& region,
                    KVariant variant);

/// Midpoint-rule L^t norm of a scalar function over the cells of `grid` in
/// `region`; t = inf gives the max.
template <class F> double cell_norm(const Grid& grid, const Region& region, double t, F&& f);

/// Sup of |Du| over the cells in the inner square [-R0/2, R0/2]^n against
/// K_main^theta (int_{[-R0,R0]^n} (1+f(x,Du)))^theta.
EstimateReport check_lipschitz_estimate(const DiscreteField& u, const Density& d, const ExponentProfile& profile,
                                        double R0, double theta = 1.0);

/// sum over interior nodes in the inner square of vol a (1+|Du|^2)^{(p-2)/2} |D^2u|^2,
/// against the same right side as the Lipschitz check.
EstimateReport check_second_derivative_estimate(const DiscreteField& u, const Density& d,
                                                const ExponentProfile& profile, double R0, double theta = 1.0);

/// int_{B_rho} |D V_p(Du)|^2 against the four-term right side with
/// S = sup_{B_2R}(1+|Du|):
///   S^{2q-p} int_{B_2R}|Du|^2 / (R-rho)^2 + S^{2q-p} int_{B_R} k^2
///   + S^{q-1} (int_{B_R} k^{p/(p-1)})^{(p-1)/p} (int_{B_2R}|Du|^p)^{1/p}.
/// Requires inf a > 0 and 2R <= 1.
EstimateReport check_higher_diff_estimate(const DiscreteField& u, const Density& d, double rho, double R);

/// (int |w|^{sigma*})^{p/sigma*} against ||lam^{-1}||_{L^s} int lam |Dw|^p,
/// sigma = ps/(s+1); the sup norm is used when sigma >= n.
EstimateReport weighted_sobolev_check(const DiscreteField& w, const Coefficient& lam, double p,
                                      const ExtendedReal& s);

struct MoserReport {
  std::vector<double> exponents;
  std::vector<double> norms;
  double sup = 0.0;
  bool monotone = true;
  std::size_t violations = 0;
  double final_gap = 0.0; ///< (sup - last norm) / sup
  bool conjugate_unbounded = false;
  bool finite = true;
};

/// Mean-normalized norms (avg (1+|Du|^2)^{p_i/2})^{1/p_i} over the cells in
/// `region`, computed as log-mean-exp.
MoserReport moser_norm_ladder_check(const DiscreteField& u, const ExponentProfile& profile, std::size_t i_max,
                                    const Region& region = {0.5});

/// Same computation for an explicit exponent list.
MoserReport ladder_norms(const DiscreteField& u, std::span<const double> exponents, const Region& region);

struct LavrentievReport {
  std::vector<std::size_t> grids;
  std::vector<double> caps;
  std::vector<double> unrestricted;         ///< per grid
  std::vector<std::vector<double>> capped;  ///< [grid][cap]
  std::vector<double> excess;               ///< per grid, relative excess at the largest cap
  std::vector<bool> decreasing_in_cap;      ///< per grid
  bool gap_flag = false;
};

constexpr double kLavrentievTolerance = 0.005;

/// Unrestricted and gradient-capped minima on a ladder of grids. The gap
/// flag is raised when the largest-cap excess is above 0.5% on every grid.
LavrentievReport lavrentiev_probe(const Density& d, const std::vector<std::size_t>& grid_nodes,
                                  const BoundaryData& bc, const std::vector<double>& caps,
                                  const SolveOptions& opts = {});

struct HoleFillingReport {
  bool hypothesis_ok = true;
  bool conclusion_ok = true;
  double c_A = 0.0;
  double c_B = 0.0;
  double worst_ratio = 0.0; ///< max over r of h(r) / (c_A A/(R0-r)^beta + c_B B)
  std::string violation;
  std::optional<std::pair<double, double>> offending;
};

/// Checks h(s) <= theta h(t) + A/(t-s)^beta + B on all sampled pairs s < t
/// and then h(r) <= c_A A/(R0-r)^beta + c_B B for the sampled r < R0, where
/// R0 is the largest sampled radius.
HoleFillingReport hole_filling_check(std::span<const double> radii, std::span<const double> h, double theta,
                                     double A, double B, double beta);

/// Constants of the geometric hole-filling iteration:
/// tau = (2 theta/(1+theta))^{1/beta}, c_A = (1-tau)^{-beta}/(1 - theta tau^{-beta}), c_B = 1/(1-theta).
std::pair<double, double> hole_filling_constants(double theta, double beta);

// ------------------------------------------------------------------ impl

template <class F> double cell_norm(const Grid& grid, const Region& region, double t, F&& f) {
  const int dim = grid.dim();
  const std::size_t nc = grid.n_cells();
  const std::size_t ny = dim == 2 ? nc : 1;
  std::vector<double> terms;
  double mx = 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nc; ++i) {
      double x[2] = {grid.cell_center(i), dim == 2 ? grid.cell_center(j) : 0.0};
      std::span<const double> pt(x, dim);
      if (!region.contains(pt)) continue;
      const double v = std::abs(f(pt));
      mx = std::max(mx, v);
      terms.push_back(v);
    }
  }
  if (terms.empty()) return 0.0;
  if (t == std::numeric_limits<double>::infinity()) return mx;
  for (double& v : terms) v = std::pow(v, t);
  return std::pow(grid.cell_volume() * pairwise_sum(terms), 1.0 / t);
}

} // namespace pqlip
