#pragma once

#include "pqlip/density.hpp"
#include "pqlip/grid.hpp"
#include "pqlip/solver.hpp"

#include <vector>

namespace pqlip {

/// Minimize int_{-1}^{1} |x|^alpha |u'|^p dx with u(-1) = A, u(1) = B.
class Oracle1DProblem {
public:
  /// Requires 0 <= alpha < 1, p > 1 and alpha/(p-1) < 1.
  Oracle1DProblem(double alpha, double p, double a, double b);

  double alpha() const { return m_alpha; }
  double p() const { return m_p; }
  double left() const { return m_a; }
  double right() const { return m_b; }
  /// alpha/(p-1)
  double beta() const { return m_alpha / (m_p - 1.0); }

  /// The density a(x)|xi|^p with a = |x|^alpha (pure power; for p = 2 it
  /// equals the normalized power-weight density).
  Density density() const;
  BoundaryData boundary() const { return BoundaryData::endpoints(m_a, m_b); }

private:
  double m_alpha, m_p, m_a, m_b;
};

/// u' = sgn(B-A) (c/|x|^alpha)^{1/(p-1)} with c = (|B-A|(1-beta)/2)^{p-1}.
class ExactMinimizer {
public:
  explicit ExactMinimizer(const Oracle1DProblem& prob);

  double c() const { return m_c; }
  double u(double x) const;
  /// Unbounded at x = 0 when alpha > 0.
  double du(double x) const;
  /// int a |u'|^p = c^{p/(p-1)} * 2/(1-beta).
  double energy() const;
  /// The closed form sampled at the nodes of a 1D grid.
  DiscreteField sample(const Grid& grid) const;

private:
  Oracle1DProblem m_prob;
  double m_c;
  double m_amp; ///< sgn(B-A) c^{1/(p-1)}
};

ExactMinimizer exact_minimizer(const Oracle1DProblem& prob);

/// Relative spread (max-min)/|mean| of the Euler flux f_xi(x, u') over the
/// cells of a 1D scalar field, excluding the two cells nearest x = 0.
/// Returns 0 for a field whose mean flux is zero.
double euler_invariant_spread(const DiscreteField& u, const Density& d);

/// beta = alpha/(p-1), the power in |u'| ~ |x|^{-beta}.
double blow_up_rate(double alpha, double p);

struct RefinementRow {
  std::size_t n_nodes = 0;
  double max_gradient = 0.0;
  double predicted_factor = 0.0; ///< 2^beta
  double observed_factor = 0.0;  ///< ratio to the previous row, NaN for the first
};

/// Solves the oracle problem on each grid and records the growth of the
/// largest cell gradient.
std::vector<RefinementRow> refinement_study(const Oracle1DProblem& prob, const std::vector<std::size_t>& n_nodes,
                                            const SolveOptions& opts = {});

} // namespace pqlip
