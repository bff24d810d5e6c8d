#pragma once

#include "pqlip/density.hpp"
#include "pqlip/grid.hpp"
#include "pqlip/kernels.hpp"

#include <optional>
#include <vector>

namespace pqlip {

/// Midpoint-rule discretization of the integral functional on a fixed grid,
/// with value, gradient and Hessian-vector products with respect to the node
/// values. Gradient entries at boundary nodes are reported as zero. Cell
/// weights are sampled once at construction.
class DiscreteEnergy {
public:
  DiscreteEnergy(const Density& d, const Grid& grid, std::size_t components,
                 const kernels::KernelSet& ks = kernels::active());

  const Grid& grid() const { return m_grid; }
  std::size_t components() const { return m_components; }
  const Density& density() const { return m_density; }
  const kernels::KernelSet& kernel_set() const { return *m_ks; }

  /// Adds -mu log(1 - |Du|^2/cap^2) per cell, an interior barrier for the
  /// constraint |Du| <= cap.
  void set_barrier(double cap, double mu);
  void clear_barrier() { m_barrier.reset(); }

  /// Per-cell gradient magnitudes and radial coefficients at a field.
  struct Curvature {
    std::vector<double> grads; ///< slot-major, N*dim slots of cell_count
    std::vector<double> s;     ///< |Du|^2 per cell
    std::vector<double> v, d1, d2;
    double energy = 0.0;
  };

  /// Energy; +inf if the barrier is active and some cell violates the cap.
  double value(const DiscreteField& u) const;
  double value_and_gradient(const DiscreteField& u, DiscreteField& grad) const;
  Curvature curvature(const DiscreteField& u) const;
  void apply_hessian(const Curvature& c, const DiscreteField& v, DiscreteField& out) const;
  void hessian_diagonal(const Curvature& c, DiscreteField& out) const;
  /// Interior tridiagonal Hessian for scalar 1D problems.
  void hessian_tridiagonal(const Curvature& c, std::vector<double>& diag, std::vector<double>& off) const;

  double max_cell_gradient(const DiscreteField& u) const;

private:
  void compute_grads(const DiscreteField& u, std::vector<double>& g) const;
  void evaluate(Curvature& c, bool derivatives) const;
  void divergence(const std::vector<double>& flux, DiscreteField& out) const;
  void check_field(const DiscreteField& u) const;

  Density m_density;
  Grid m_grid;
  std::size_t m_components;
  const kernels::KernelSet* m_ks;
  std::size_t m_cells;
  struct TermData {
    kernels::TermSpec spec;
    double w_const = 0.0;
    std::vector<double> w;
  };
  std::vector<TermData> m_terms;
  std::optional<kernels::TermSpec> m_barrier;
};

} // namespace pqlip
