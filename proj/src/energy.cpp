#include "pqlip/energy.hpp"

#include "pqlip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pqlip {

DiscreteEnergy::DiscreteEnergy(const Density& d, const Grid& grid, std::size_t components,
                               const kernels::KernelSet& ks)
    : m_density(d), m_grid(grid), m_components(components), m_ks(&ks), m_cells(grid.cell_count()) {
  if (d.dim() != grid.dim()) throw PreconditionError("density and grid have different dimensions");
  if (components == 0) throw PreconditionError("field needs at least one component");
  const int dim = grid.dim();
  const std::size_t nc = grid.n_cells();
  for (const auto& term : d.terms()) {
    TermData td;
    td.spec.kind = term.profile;
    td.spec.exponent = term.exponent;
    if (term.weight.is_constant()) {
      td.w_const = term.weight.constant_value();
    } else {
      td.w.resize(m_cells);
      for (std::size_t c = 0; c < m_cells; ++c) {
        double x[2] = {grid.cell_center(c % nc), dim == 2 ? grid.cell_center(c / nc) : 0.0};
        const double w = term.weight.value(std::span<const double>(x, dim));
        if (!std::isfinite(w))
          throw QuadratureSingularityError("coefficient " + term.weight.describe() +
                                           " is not finite at a cell centre");
        td.w[c] = w;
      }
    }
    m_terms.push_back(std::move(td));
  }
}

void DiscreteEnergy::set_barrier(double cap, double mu) {
  if (!(cap > 0.0) || !(mu > 0.0)) throw PreconditionError("barrier needs cap > 0 and mu > 0");
  kernels::TermSpec spec;
  spec.kind = kernels::TermSpec::Kind::barrier;
  spec.cap2 = cap * cap;
  spec.mu = mu;
  m_barrier = spec;
}

void DiscreteEnergy::check_field(const DiscreteField& u) const {
  if (!(u.grid() == m_grid) || u.components() != m_components || !u.is_full())
    throw PreconditionError("field does not match the energy's grid and component count");
}

void DiscreteEnergy::compute_grads(const DiscreteField& u, std::vector<double>& g) const {
  const int dim = m_grid.dim();
  const std::size_t n = m_grid.n_nodes();
  const double h = m_grid.spacing();
  g.resize(m_components * dim * m_cells);
  for (std::size_t c = 0; c < m_components; ++c) {
    const double* uc = u.slot(c).data();
    if (dim == 1) {
      m_ks->grad_1d(uc, n - 1, 1.0 / h, g.data() + c * m_cells);
    } else {
      m_ks->grad_2d(uc, n, n, 0.5 / h, g.data() + (2 * c) * m_cells, g.data() + (2 * c + 1) * m_cells);
    }
  }
}

void DiscreteEnergy::evaluate(Curvature& c, bool derivatives) const {
  const std::size_t slots = c.grads.size() / m_cells;
  c.s.assign(m_cells, 0.0);
  for (std::size_t k = 0; k < slots; ++k) m_ks->sum_squares(c.grads.data() + k * m_cells, m_cells, k > 0, c.s.data());
  c.v.assign(m_cells, 0.0);
  if (derivatives) {
    c.d1.assign(m_cells, 0.0);
    c.d2.assign(m_cells, 0.0);
  }
  double* d1 = derivatives ? c.d1.data() : nullptr;
  double* d2 = derivatives ? c.d2.data() : nullptr;
  for (const auto& t : m_terms)
    m_ks->radial_term(c.s.data(), t.w.empty() ? nullptr : t.w.data(), t.w_const, m_cells, t.spec, c.v.data(), d1, d2);
  if (m_barrier) m_ks->radial_term(c.s.data(), nullptr, 0.0, m_cells, *m_barrier, c.v.data(), d1, d2);

  c.energy = m_grid.cell_volume() * m_ks->pairwise_sum(c.v.data(), m_cells);
  if (!std::isfinite(c.energy)) {
    if (m_barrier) {
      const double cap2 = m_barrier->cap2;
      if (std::any_of(c.s.begin(), c.s.end(), [cap2](double s) { return !(s < cap2); })) {
        c.energy = std::numeric_limits<double>::infinity();
        return;
      }
    }
    throw QuadratureSingularityError("discrete energy is not finite");
  }
}

double DiscreteEnergy::value(const DiscreteField& u) const {
  check_field(u);
  Curvature c;
  compute_grads(u, c.grads);
  evaluate(c, false);
  return c.energy;
}

DiscreteEnergy::Curvature DiscreteEnergy::curvature(const DiscreteField& u) const {
  check_field(u);
  Curvature c;
  compute_grads(u, c.grads);
  evaluate(c, true);
  return c;
}

void DiscreteEnergy::divergence(const std::vector<double>& flux, DiscreteField& out) const {
  const int dim = m_grid.dim();
  const std::size_t n = m_grid.n_nodes();
  const double h = m_grid.spacing();
  for (std::size_t c = 0; c < m_components; ++c) {
    double* oc = out.slot(c).data();
    if (dim == 1) {
      m_ks->div_1d(flux.data() + c * m_cells, n - 1, 1.0 / h, oc);
    } else {
      m_ks->div_2d(flux.data() + (2 * c) * m_cells, flux.data() + (2 * c + 1) * m_cells, n, n, 0.5 / h, oc);
    }
  }
  const auto& mask = out.boundary_mask();
  for (std::size_t c = 0; c < m_components; ++c) {
    auto sl = out.slot(c);
    for (std::size_t l = 0; l < sl.size(); ++l)
      if (mask[l]) sl[l] = 0.0;
  }
}

double DiscreteEnergy::value_and_gradient(const DiscreteField& u, DiscreteField& grad) const {
  check_field(u);
  check_field(grad);
  Curvature c;
  compute_grads(u, c.grads);
  evaluate(c, true);
  if (!std::isfinite(c.energy)) return c.energy;
  std::vector<double> flux(c.grads.size());
  const std::size_t slots = c.grads.size() / m_cells;
  const double vol = m_grid.cell_volume();
  for (std::size_t k = 0; k < slots; ++k)
    m_ks->scaled_product(c.d1.data(), c.grads.data() + k * m_cells, vol, m_cells, flux.data() + k * m_cells);
  divergence(flux, grad);
  return c.energy;
}

void DiscreteEnergy::apply_hessian(const Curvature& c, const DiscreteField& v, DiscreteField& out) const {
  check_field(v);
  check_field(out);
  std::vector<double> dv;
  compute_grads(v, dv);
  const std::size_t slots = dv.size() / m_cells;
  std::vector<double> dot(m_cells);
  for (std::size_t k = 0; k < slots; ++k)
    m_ks->dot_accumulate(c.grads.data() + k * m_cells, dv.data() + k * m_cells, m_cells, k > 0, dot.data());
  std::vector<double> flux(dv.size());
  const double vol = m_grid.cell_volume();
  for (std::size_t k = 0; k < slots; ++k)
    m_ks->hess_flux(c.d1.data(), c.d2.data(), c.grads.data() + k * m_cells, dv.data() + k * m_cells, dot.data(), vol,
                    m_cells, flux.data() + k * m_cells);
  divergence(flux, out);
}

void DiscreteEnergy::hessian_diagonal(const Curvature& c, DiscreteField& out) const {
  check_field(out);
  const int dim = m_grid.dim();
  const std::size_t n = m_grid.n_nodes();
  const std::size_t nc = m_grid.n_cells();
  const double h = m_grid.spacing();
  const double vol = m_grid.cell_volume();
  std::fill(out.values().begin(), out.values().end(), 0.0);
  for (std::size_t comp = 0; comp < m_components; ++comp) {
    auto oc = out.slot(comp);
    for (std::size_t cell = 0; cell < m_cells; ++cell) {
      const double d1 = c.d1[cell], d2 = c.d2[cell];
      if (dim == 1) {
        // dG/du = -1/h at the left node, +1/h at the right node.
        const double g = c.grads[comp * m_cells + cell];
        const double contrib = vol * (d1 + d2 * g * g) / (h * h);
        oc[cell] += contrib;
        oc[cell + 1] += contrib;
      } else {
        const double gx = c.grads[(2 * comp) * m_cells + cell];
        const double gy = c.grads[(2 * comp + 1) * m_cells + cell];
        const std::size_t ci = cell % nc, cj = cell / nc;
        for (int corner = 0; corner < 4; ++corner) {
          const int di = corner & 1, dj = corner >> 1;
          const double sx = (di ? 1.0 : -1.0) * 0.5 / h;
          const double sy = (dj ? 1.0 : -1.0) * 0.5 / h;
          const double proj = gx * sx + gy * sy;
          oc[(cj + dj) * n + ci + di] += vol * (d1 * (sx * sx + sy * sy) + d2 * proj * proj);
        }
      }
    }
  }
  const auto& mask = out.boundary_mask();
  for (std::size_t comp = 0; comp < m_components; ++comp) {
    auto sl = out.slot(comp);
    for (std::size_t l = 0; l < sl.size(); ++l)
      if (mask[l]) sl[l] = 0.0;
  }
}

void DiscreteEnergy::hessian_tridiagonal(const Curvature& c, std::vector<double>& diag,
                                         std::vector<double>& off) const {
  if (m_grid.dim() != 1 || m_components != 1) throw PreconditionError("tridiagonal Hessian needs a scalar 1D problem");
  const std::size_t n = m_grid.n_nodes();
  const double h = m_grid.spacing();
  const double vol = m_grid.cell_volume();
  // Interior node i (1..n-2) maps to row i-1.
  diag.assign(n - 2, 0.0);
  off.assign(n - 3, 0.0);
  for (std::size_t cell = 0; cell + 1 < n; ++cell) {
    const double g = c.grads[cell];
    const double kappa = vol * (c.d1[cell] + c.d2[cell] * g * g) / (h * h);
    if (cell >= 1) diag[cell - 1] += kappa;           // left node = cell
    if (cell + 1 <= n - 2) diag[cell] += kappa;       // right node = cell+1
    if (cell >= 1 && cell + 1 <= n - 2) off[cell - 1] = -kappa;
  }
}

double DiscreteEnergy::max_cell_gradient(const DiscreteField& u) const {
  check_field(u);
  std::vector<double> g;
  compute_grads(u, g);
  std::vector<double> s(m_cells, 0.0);
  const std::size_t slots = g.size() / m_cells;
  for (std::size_t k = 0; k < slots; ++k) m_ks->sum_squares(g.data() + k * m_cells, m_cells, k > 0, s.data());
  return std::sqrt(*std::max_element(s.begin(), s.end()));
}

} // namespace pqlip
