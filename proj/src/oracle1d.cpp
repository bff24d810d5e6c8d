#include "pqlip/oracle1d.hpp"

#include "pqlip/energy.hpp"
#include "pqlip/errors.hpp"
#include "pqlip/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pqlip {

Oracle1DProblem::Oracle1DProblem(double alpha, double p, double a, double b) : m_alpha(alpha), m_p(p), m_a(a), m_b(b) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw PreconditionError("oracle problem needs 0 <= alpha < 1");
  if (!(p > 1.0) || !std::isfinite(p)) throw PreconditionError("oracle problem needs p > 1");
  if (!(alpha / (p - 1.0) < 1.0))
    throw PreconditionError("alpha/(p-1) >= 1: |x|^{-alpha/(p-1)} is not integrable, no finite-energy minimizer");
  if (!std::isfinite(a) || !std::isfinite(b)) throw PreconditionError("boundary values must be finite");
}

Density Oracle1DProblem::density() const {
  const Coefficient a = m_alpha == 0.0 ? Coefficient::constant(1.0, 1) : Coefficient::power_weight(m_alpha, {0.0});
  return Density::pure_power(a, m_p);
}

ExactMinimizer::ExactMinimizer(const Oracle1DProblem& prob) : m_prob(prob) {
  const double jump = prob.right() - prob.left();
  const double beta = prob.beta();
  m_c = std::pow(std::abs(jump) * (1.0 - beta) / 2.0, prob.p() - 1.0);
  const double sign = jump > 0.0 ? 1.0 : (jump < 0.0 ? -1.0 : 0.0);
  m_amp = sign * std::abs(jump) * (1.0 - beta) / 2.0;
}

double ExactMinimizer::u(double x) const {
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("oracle evaluated outside [-1,1]");
  const double beta = m_prob.beta();
  const double mid = 0.5 * (m_prob.left() + m_prob.right());
  if (x == 1.0) return m_prob.right();
  if (x == -1.0) return m_prob.left();
  const double sx = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  return mid + m_amp * sx * std::pow(std::abs(x), 1.0 - beta) / (1.0 - beta);
}

double ExactMinimizer::du(double x) const {
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("oracle evaluated outside [-1,1]");
  if (m_amp == 0.0) return 0.0;
  const double beta = m_prob.beta();
  if (x == 0.0 && beta > 0.0) return std::copysign(std::numeric_limits<double>::infinity(), m_amp);
  return m_amp * std::pow(std::abs(x), -beta);
}

double ExactMinimizer::energy() const {
  const double p = m_prob.p();
  return std::pow(m_c, p / (p - 1.0)) * 2.0 / (1.0 - m_prob.beta());
}

DiscreteField ExactMinimizer::sample(const Grid& grid) const {
  if (grid.dim() != 1) throw PreconditionError("oracle fields live on 1D grids");
  DiscreteField f(grid, 1);
  for (std::size_t i = 0; i < grid.n_nodes(); ++i) f.at(0, i) = u(grid.node_coord(i));
  f.set_certificate({"closed_form", 0.0, energy()});
  return f;
}

ExactMinimizer exact_minimizer(const Oracle1DProblem& prob) { return ExactMinimizer(prob); }

double euler_invariant_spread(const DiscreteField& u, const Density& d) {
  if (u.grid().dim() != 1 || u.components() != 1 || !u.is_full())
    throw PreconditionError("Euler spread needs a full scalar 1D field");
  const Grid& g = u.grid();
  const CellArray grad = discrete_gradient(u);
  const std::size_t nc = g.n_cells();
  std::vector<std::size_t> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g.cell_center(a)) < std::abs(g.cell_center(b));
  });
  std::vector<bool> skip(nc, false);
  for (std::size_t k = 0; k < std::min<std::size_t>(2, nc); ++k) skip[order[k]] = true;

  std::vector<double> flux;
  for (std::size_t c = 0; c < nc; ++c) {
    if (skip[c]) continue;
    const double x = g.cell_center(c);
    const double xi = grad.at(0, c);
    flux.push_back(d.xi_gradient(std::span<const double>(&x, 1), std::span<const double>(&xi, 1))[0]);
  }
  if (flux.empty()) return 0.0;
  const double mean = pairwise_sum(flux) / static_cast<double>(flux.size());
  if (mean == 0.0) return 0.0;
  const auto [mn, mx] = std::minmax_element(flux.begin(), flux.end());
  return (*mx - *mn) / std::abs(mean);
}

double blow_up_rate(double alpha, double p) {
  if (!(alpha >= 0.0 && alpha < 1.0) || !(p > 1.0) || !(alpha / (p - 1.0) < 1.0))
    throw PreconditionError("blow-up rate needs an admissible (alpha, p)");
  return alpha / (p - 1.0);
}

std::vector<RefinementRow> refinement_study(const Oracle1DProblem& prob, const std::vector<std::size_t>& n_nodes,
                                            const SolveOptions& opts) {
  const Density d = prob.density();
  const double predicted = std::pow(2.0, prob.beta());
  std::vector<RefinementRow> rows;
  for (std::size_t n : n_nodes) {
    const Grid grid(1, n);
    const SolveResult res = minimize(d, grid, prob.boundary(), opts);
    const DiscreteEnergy e(d, grid, 1);
    RefinementRow row;
    row.n_nodes = n;
    row.max_gradient = e.max_cell_gradient(res.field);
    row.predicted_factor = predicted;
    row.observed_factor =
        rows.empty() ? std::numeric_limits<double>::quiet_NaN() : row.max_gradient / rows.back().max_gradient;
    rows.push_back(row);
  }
  return rows;
}

} // namespace pqlip
