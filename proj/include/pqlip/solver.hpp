#pragma once

#include "pqlip/density.hpp"
#include "pqlip/energy.hpp"
#include "pqlip/errors.hpp"
#include "pqlip/grid.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pqlip {

/// Dirichlet data given by a function on the closed square; its values at
/// the boundary nodes are imposed and the same function seeds the interior.
///   affine:    u^c(x) = c0[c] + sum_a g[c*dim + a] x_a
///   quadratic: u(x)   = c0 + g.x + x^T H x / 2       (scalar, H symmetric)
class BoundaryData {
public:
  enum class Kind { affine, quadratic };

  static BoundaryData affine(std::vector<double> c0, std::vector<double> gradient, int dim);
  /// One-dimensional scalar data u(-1) = a, u(1) = b.
  static BoundaryData endpoints(double a, double b);
  static BoundaryData constant(double value, int dim, std::size_t components = 1);
  static BoundaryData quadratic(double c0, std::vector<double> gradient, std::vector<double> hessian, int dim);

  Kind kind() const { return m_kind; }
  int dim() const { return m_dim; }
  std::size_t components() const { return m_c0.size(); }
  double value(std::size_t component, std::span<const double> x) const;
  /// Largest |Du| of the extension over the closed square.
  double lipschitz() const;
  /// The extension sampled at every node.
  DiscreteField sample(const Grid& grid) const;

private:
  Kind m_kind = Kind::affine;
  int m_dim = 1;
  std::vector<double> m_c0, m_g, m_h;
};

enum class SolveMethod { gradient_backtracking, newton_trust };

std::string to_string(SolveMethod m);

struct IterationRecord {
  std::size_t iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  SolveMethod method = SolveMethod::newton_trust;
};

struct SolveOptions {
  SolveMethod method = SolveMethod::newton_trust;
  double tol_grad = 1e-8;
  double tol_energy = 1e-12;
  std::size_t max_iter = 2000;
  /// Starting field; the sampled boundary extension when empty.
  std::optional<DiscreteField> seed;
  const kernels::KernelSet* kernels = nullptr;
  std::function<void(const IterationRecord&)> trace;

  void validate() const;
};

struct SolveReport {
  SolveMethod method_requested = SolveMethod::newton_trust;
  SolveMethod method_used = SolveMethod::newton_trust;
  bool fell_back = false;
  std::string fallback_reason;
  std::size_t iterations = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double rel_decrease = 0.0;
};

struct SolveResult {
  DiscreteField field;
  SolveReport report;
};

class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, DiscreteField last, double residual, SolveReport report)
      : Error(what), m_last(std::move(last)), m_residual(residual), m_report(std::move(report)) {}
  const DiscreteField& last_iterate() const { return m_last; }
  double residual() const { return m_residual; }
  const SolveReport& report() const { return m_report; }

private:
  DiscreteField m_last;
  double m_residual;
  SolveReport m_report;
};

/// Minimizes the discrete energy over interior node values. The returned
/// field carries a solver certificate.
SolveResult minimize(const Density& d, const Grid& grid, const BoundaryData& bc, const SolveOptions& opts = {});

/// Minimizes a prepared energy (which may carry a barrier) from `start`.
SolveResult minimize_energy(const DiscreteEnergy& e, DiscreteField start, const SolveOptions& opts);

struct LadderSchedule {
  std::vector<double> h_values{10.0, 100.0, 1000.0, 10000.0};
  double p = 2.0;
  ExtendedReal s = ExtendedReal::infinity();

  /// ps/(s+1).
  double sigma() const;
  void validate() const;
};

struct LadderRung {
  double h = 0.0;
  std::optional<DiscreteField> field;
  double energy = 0.0;           ///< F_h(v_h)
  double base_energy = 0.0;      ///< F(v_h)
  double candidate_energy = 0.0; ///< F_h of the boundary extension
  bool comparison_ok = false;    ///< F_h(v_h) <= F_h(candidate)
  bool warm_started = false;
  bool reseeded = false;
  bool ok = false;
  std::string error;
  SolveReport report;
};

/// Minimizes f_h = f + (1/h)(1+|xi|^2)^{sigma/2} for each h in turn, warm
/// starting every rung from the previous minimizer.
std::vector<LadderRung> solve_ladder(const Density& d, const Grid& grid, const BoundaryData& bc,
                                     const LadderSchedule& schedule, const SolveOptions& opts = {});

struct CappedResult {
  DiscreteField field;
  double energy = 0.0;        ///< unpenalized energy of the capped minimizer
  double max_gradient = 0.0;
  std::size_t barrier_steps = 0;
  double final_mu = 0.0;      ///< barrier weight of the last converged step
};

/// Minimizes the energy subject to |Du| <= cap on every cell through a
/// log-barrier path, stopping early when a subproblem no longer converges
/// in double precision. Throws InfeasibleError when the cap does not exceed the
/// Lipschitz constant of the boundary data.
CappedResult minimize_capped(const Density& d, const Grid& grid, const BoundaryData& bc, double cap,
                             const SolveOptions& opts = {});

} // namespace pqlip
