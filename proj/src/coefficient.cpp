#include "pqlip/coefficient.hpp"

#include "pqlip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pqlip {
namespace {

void require_in_domain(std::span<const double> x, int dim) {
  if (x.size() != static_cast<std::size_t>(dim))
    throw DomainError("point has " + std::to_string(x.size()) + " coordinates, coefficient expects " +
                      std::to_string(dim));
  for (double v : x)
    if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) throw DomainError("point outside [-1,1]^n");
}

bool in_closed_domain(const std::vector<double>& c) {
  return std::all_of(c.begin(), c.end(), [](double v) { return std::abs(v) <= 1.0; });
}

} // namespace

bool point_in_region(std::span<const double> x, const Region& region) { return region.contains(x); }

Coefficient Coefficient::constant(double value, int dim) {
  if (!std::isfinite(value) || value < 0.0) throw PreconditionError("constant coefficient must be finite and >= 0");
  if (dim != 1 && dim != 2) throw PreconditionError("coefficient dimension must be 1 or 2");
  Coefficient c;
  c.m_kind = Kind::constant;
  c.m_dim = dim;
  c.m_value = value;
  if (value == 0.0) c.m_s_exp = ExtendedReal(0);
  return c;
}

Coefficient Coefficient::power_weight(double alpha, std::vector<double> center) {
  if (!std::isfinite(alpha) || alpha <= 0.0) throw PreconditionError("power weight exponent must be > 0");
  if (center.size() != 1 && center.size() != 2) throw PreconditionError("power weight centre must have 1 or 2 coordinates");
  Coefficient c;
  c.m_kind = Kind::power_weight;
  c.m_dim = static_cast<int>(center.size());
  c.m_alpha = alpha;
  c.m_center = std::move(center);
  if (in_closed_domain(c.m_center)) {
    const ExtendedReal a = ExtendedReal::from_double(alpha);
    const ExtendedReal n(c.m_dim);
    c.m_degenerate.push_back(c.m_center);
    c.m_s_exp = n / a;
    if (alpha < 1.0) {
      c.m_singular.push_back(c.m_center);
      c.m_r_exp = n / (ExtendedReal(1) - a);
    }
  }
  return c;
}

Coefficient Coefficient::tabulated(Grid grid, std::vector<double> node_values) {
  if (node_values.size() != grid.node_count()) throw PreconditionError("tabulated coefficient: sample count does not match grid");
  for (double v : node_values)
    if (!std::isfinite(v) || v < 0.0) throw PreconditionError("tabulated coefficient samples must be finite and >= 0");
  Coefficient c;
  c.m_kind = Kind::tabulated;
  c.m_dim = grid.dim();
  const std::size_t n = grid.n_nodes();
  const std::size_t ny = grid.dim() == 2 ? n : 1;
  bool zero_set = false;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (node_values[j * n + i] != 0.0) continue;
      std::vector<double> pt{grid.node_coord(i)};
      if (grid.dim() == 2) pt.push_back(grid.node_coord(j));
      c.m_degenerate.push_back(std::move(pt));
      if (i + 1 < n && node_values[j * n + i + 1] == 0.0) zero_set = true;
      if (j + 1 < ny && node_values[(j + 1) * n + i] == 0.0) zero_set = true;
    }
  }
  // Piecewise-linear interpolation vanishes linearly at an isolated zero
  // node (a ~ |x|), so a^{-1} is in L^s iff s < n; a zero edge kills every s.
  if (!c.m_degenerate.empty()) c.m_s_exp = zero_set ? ExtendedReal(0) : ExtendedReal(c.m_dim);
  c.m_table_grid = std::make_shared<const Grid>(grid);
  c.m_table = std::make_shared<const std::vector<double>>(std::move(node_values));
  return c;
}

double Coefficient::value(std::span<const double> x) const {
  require_in_domain(x, m_dim);
  switch (m_kind) {
    case Kind::constant:
      return m_value;
    case Kind::power_weight: {
      double r2 = 0.0;
      for (int k = 0; k < m_dim; ++k) r2 += (x[k] - m_center[k]) * (x[k] - m_center[k]);
      return std::pow(r2, 0.5 * m_alpha);
    }
    case Kind::tabulated: {
      const Grid& g = *m_table_grid;
      const std::size_t n = g.n_nodes();
      std::size_t idx[2] = {0, 0};
      double frac[2] = {0.0, 0.0};
      for (int k = 0; k < m_dim; ++k) {
        const double u = std::clamp((x[k] + 1.0) / g.spacing(), 0.0, static_cast<double>(n - 1));
        std::size_t i = static_cast<std::size_t>(std::floor(u));
        if (i > n - 2) i = n - 2;
        idx[k] = i;
        frac[k] = u - static_cast<double>(i);
      }
      const auto& t = *m_table;
      if (m_dim == 1) return (1.0 - frac[0]) * t[idx[0]] + frac[0] * t[idx[0] + 1];
      const std::size_t base = idx[1] * n + idx[0];
      const double v00 = t[base], v10 = t[base + 1], v01 = t[base + n], v11 = t[base + n + 1];
      return (1.0 - frac[1]) * ((1.0 - frac[0]) * v00 + frac[0] * v10) +
             frac[1] * ((1.0 - frac[0]) * v01 + frac[0] * v11);
    }
  }
  return 0.0;
}

std::vector<double> Coefficient::gradient(std::span<const double> x) const {
  require_in_domain(x, m_dim);
  std::vector<double> g(m_dim, 0.0);
  switch (m_kind) {
    case Kind::constant:
      break;
    case Kind::power_weight: {
      double r2 = 0.0;
      for (int k = 0; k < m_dim; ++k) r2 += (x[k] - m_center[k]) * (x[k] - m_center[k]);
      if (r2 == 0.0) {
        if (m_alpha > 1.0) break;
        throw SingularPointError("power weight is not differentiable at its centre");
      }
      const double f = m_alpha * std::pow(r2, 0.5 * m_alpha - 1.0);
      for (int k = 0; k < m_dim; ++k) g[k] = f * (x[k] - m_center[k]);
      break;
    }
    case Kind::tabulated: {
      const double h = m_table_grid->spacing();
      std::vector<double> lo(x.begin(), x.end()), hi(x.begin(), x.end());
      for (int k = 0; k < m_dim; ++k) {
        lo[k] = std::max(-1.0, x[k] - h);
        hi[k] = std::min(1.0, x[k] + h);
        g[k] = (value(hi) - value(lo)) / (hi[k] - lo[k]);
        lo[k] = hi[k] = x[k];
      }
      break;
    }
  }
  return g;
}

double Coefficient::gradient_norm(std::span<const double> x) const {
  double acc = 0.0;
  for (double v : gradient(x)) acc += v * v;
  return std::sqrt(acc);
}

double Coefficient::sup() const {
  switch (m_kind) {
    case Kind::constant:
      return m_value;
    case Kind::power_weight: {
      // |x - c| is maximized over the square at a corner.
      double best = 0.0;
      const int corners = 1 << m_dim;
      for (int mask = 0; mask < corners; ++mask) {
        double r2 = 0.0;
        for (int k = 0; k < m_dim; ++k) {
          const double xk = (mask >> k) & 1 ? 1.0 : -1.0;
          r2 += (xk - m_center[k]) * (xk - m_center[k]);
        }
        best = std::max(best, r2);
      }
      return std::pow(best, 0.5 * m_alpha);
    }
    case Kind::tabulated:
      return *std::max_element(m_table->begin(), m_table->end());
  }
  return 0.0;
}

double Coefficient::inf() const {
  switch (m_kind) {
    case Kind::constant:
      return m_value;
    case Kind::power_weight: {
      double r2 = 0.0;
      for (int k = 0; k < m_dim; ++k) {
        const double d = std::max(0.0, std::abs(m_center[k]) - 1.0);
        r2 += d * d;
      }
      return std::pow(r2, 0.5 * m_alpha);
    }
    case Kind::tabulated:
      return *std::min_element(m_table->begin(), m_table->end());
  }
  return 0.0;
}

std::string Coefficient::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (m_kind) {
    case Kind::constant:
      os << "constant(" << m_value << ")";
      break;
    case Kind::power_weight:
      os << "power_weight(alpha=" << m_alpha << ", center=(";
      for (std::size_t k = 0; k < m_center.size(); ++k) os << (k ? "," : "") << m_center[k];
      os << "))";
      break;
    case Kind::tabulated:
      os << "tabulated(" << m_table_grid->n_nodes() << " nodes/axis)";
      break;
  }
  return os.str();
}

} // namespace pqlip
