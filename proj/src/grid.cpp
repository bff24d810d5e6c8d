#include "pqlip/grid.hpp"

#include "pqlip/errors.hpp"

#include <cmath>

namespace pqlip {

Grid::Grid(int dim, std::size_t n_nodes) : m_dim(dim), m_n(n_nodes) {
  if (dim != 1 && dim != 2) throw PreconditionError("grid dimension must be 1 or 2");
  if (n_nodes < 3) throw PreconditionError("grid needs at least 3 nodes per axis");
  m_h = 2.0 / static_cast<double>(n_nodes - 1);
}

double Grid::cell_volume() const { return m_dim == 1 ? m_h : m_h * m_h; }

std::size_t Grid::node_count() const { return m_dim == 1 ? m_n : m_n * m_n; }

std::size_t Grid::cell_count() const { return m_dim == 1 ? m_n - 1 : (m_n - 1) * (m_n - 1); }

bool Grid::contains(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(m_dim)) return false;
  for (double v : x)
    if (!(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12)) return false;
  return true;
}

bool Region::contains(std::span<const double> x) const {
  for (double v : x)
    if (std::abs(v) > half_width + 1e-12) return false;
  return true;
}

IndexBox full_node_box(const Grid& g) {
  IndexBox b;
  b.hi[0] = g.n_nodes();
  b.hi[1] = g.dim() == 2 ? g.n_nodes() : 1;
  return b;
}

IndexBox full_cell_box(const Grid& g) {
  IndexBox b;
  b.hi[0] = g.n_cells();
  b.hi[1] = g.dim() == 2 ? g.n_cells() : 1;
  return b;
}

LatticeArray::LatticeArray(Grid grid, Stagger stagger, IndexBox box, std::size_t width)
    : m_grid(grid), m_stagger(stagger), m_box(box), m_width(width), m_values(box.size() * width, 0.0) {
  if (box.hi[0] < box.lo[0] || box.hi[1] < box.lo[1]) throw IndexError("inverted index box");
}

double LatticeArray::coord(int axis, std::size_t index) const {
  return -1.0 + (static_cast<double>(index) + 0.5 * m_stagger.half[axis]) * m_grid.spacing();
}

std::array<double, 2> LatticeArray::point(std::size_t i, std::size_t j) const {
  return {coord(0, i), m_grid.dim() == 2 ? coord(1, j) : 0.0};
}

double LatticeArray::magnitude(std::size_t i, std::size_t j) const {
  const std::size_t l = local(i, j), n = points();
  double acc = 0.0;
  for (std::size_t k = 0; k < m_width; ++k) acc += m_values[k * n + l] * m_values[k * n + l];
  return std::sqrt(acc);
}

DiscreteField::DiscreteField(Grid grid, std::size_t components)
    : LatticeArray(grid, Stagger::nodes(), full_node_box(grid), components), m_mask(points(), 0) {
  if (components == 0) throw PreconditionError("field needs at least one component");
  const std::size_t last = grid.n_nodes() - 1;
  for_each([&](std::size_t i, std::size_t j, std::size_t l) {
    bool edge = i == 0 || i == last;
    if (grid.dim() == 2) edge = edge || j == 0 || j == last;
    m_mask[l] = edge ? 1 : 0;
  });
}

DiscreteField::DiscreteField(Grid grid, std::size_t components, IndexBox box)
    : LatticeArray(grid, Stagger::nodes(), box, components), m_mask(points(), 0) {
  if (components == 0) throw PreconditionError("field needs at least one component");
}

bool DiscreteField::is_full() const { return m_box == full_node_box(m_grid); }

std::size_t DiscreteField::interior_count() const {
  std::size_t c = 0;
  for (auto m : m_mask) c += m == 0;
  return c;
}

bool DiscreteField::all_finite() const {
  for (double v : m_values)
    if (!std::isfinite(v)) return false;
  return true;
}

} // namespace pqlip
