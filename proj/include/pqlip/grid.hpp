#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pqlip {

/// Uniform grid on [-1,1]^dim (dim 1 or 2) with the same node count per axis.
class Grid {
public:
  Grid(int dim, std::size_t n_nodes);

  int dim() const { return m_dim; }
  std::size_t n_nodes() const { return m_n; }
  std::size_t n_cells() const { return m_n - 1; }
  double spacing() const { return m_h; }
  double cell_volume() const;
  std::size_t node_count() const;
  std::size_t cell_count() const;
  double node_coord(std::size_t i) const { return -1.0 + static_cast<double>(i) * m_h; }
  double cell_center(std::size_t i) const { return -1.0 + (static_cast<double>(i) + 0.5) * m_h; }
  bool contains(std::span<const double> x) const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.m_dim == b.m_dim && a.m_n == b.m_n; }

private:
  int m_dim;
  std::size_t m_n;
  double m_h;
};

/// Half-open index box; axis 1 is [0,1) for one-dimensional data.
struct IndexBox {
  std::array<std::size_t, 2> lo{0, 0};
  std::array<std::size_t, 2> hi{1, 1};

  std::size_t extent(int axis) const { return hi[axis] - lo[axis]; }
  std::size_t size() const { return extent(0) * extent(1); }
  bool contains(std::size_t i, std::size_t j) const {
    return i >= lo[0] && i < hi[0] && j >= lo[1] && j < hi[1];
  }
  friend bool operator==(const IndexBox&, const IndexBox&) = default;
};

/// Where lattice points sit relative to nodes: 0 = on nodes, 1 = half a
/// spacing along that axis (cell centres are {1,1}, x-edges {1,0}).
struct Stagger {
  std::array<int, 2> half{0, 0};
  static Stagger nodes() { return {}; }
  static Stagger cells(int dim) { return {{1, dim > 1 ? 1 : 0}}; }
  friend bool operator==(const Stagger&, const Stagger&) = default;
};

/// Concentric sub-square [-R, R]^dim.
struct Region {
  double half_width = 1.0;
  bool contains(std::span<const double> x) const;
};

/// Values on a (possibly staggered) lattice over an index box, `width`
/// numbers per lattice point, stored slot-major: slot k occupies a
/// contiguous run over the box in row-major order (x fastest).
class LatticeArray {
public:
  LatticeArray(Grid grid, Stagger stagger, IndexBox box, std::size_t width);

  const Grid& grid() const { return m_grid; }
  const Stagger& stagger() const { return m_stagger; }
  const IndexBox& box() const { return m_box; }
  std::size_t width() const { return m_width; }
  std::size_t points() const { return m_box.size(); }

  double coord(int axis, std::size_t index) const;
  std::array<double, 2> point(std::size_t i, std::size_t j) const;

  std::size_t local(std::size_t i, std::size_t j) const {
    return (j - m_box.lo[1]) * m_box.extent(0) + (i - m_box.lo[0]);
  }
  double& at(std::size_t k, std::size_t i, std::size_t j = 0) { return m_values[k * points() + local(i, j)]; }
  double at(std::size_t k, std::size_t i, std::size_t j = 0) const {
    return m_values[k * points() + local(i, j)];
  }
  std::span<double> slot(std::size_t k) { return {m_values.data() + k * points(), points()}; }
  std::span<const double> slot(std::size_t k) const { return {m_values.data() + k * points(), points()}; }
  std::vector<double>& values() { return m_values; }
  const std::vector<double>& values() const { return m_values; }

  /// Euclidean norm of the `width` numbers at lattice point (i, j).
  double magnitude(std::size_t i, std::size_t j = 0) const;

  /// Visit every lattice point as (i, j, local index).
  template <class F> void for_each(F&& f) const {
    for (std::size_t j = m_box.lo[1]; j < m_box.hi[1]; ++j)
      for (std::size_t i = m_box.lo[0]; i < m_box.hi[0]; ++i) f(i, j, local(i, j));
  }

protected:
  Grid m_grid;
  Stagger m_stagger;
  IndexBox m_box;
  std::size_t m_width;
  std::vector<double> m_values;
};

/// Cell-indexed N x dim gradient arrays; slot c*dim + a holds d u^c / d x_a.
using CellArray = LatticeArray;

/// Marks a field as the output of a converged solve.
struct Certificate {
  std::string source;           ///< "solver" or "closed_form"
  double grad_residual = 0.0;   ///< max-norm of the interior energy gradient
  double energy = 0.0;
};

/// Node values of an N-vector field with a Dirichlet boundary mask.
class DiscreteField : public LatticeArray {
public:
  /// Zero field on the full node set; the mask marks the grid boundary.
  DiscreteField(Grid grid, std::size_t components);
  /// Field over a sub-box of nodes (used by shifts); nothing is masked.
  DiscreteField(Grid grid, std::size_t components, IndexBox box);

  std::size_t components() const { return m_width; }
  bool is_full() const;
  bool is_boundary(std::size_t i, std::size_t j = 0) const { return m_mask[local(i, j)] != 0; }
  const std::vector<std::uint8_t>& boundary_mask() const { return m_mask; }
  std::size_t interior_count() const;

  const std::optional<Certificate>& certificate() const { return m_certificate; }
  void set_certificate(Certificate c) { m_certificate = std::move(c); }
  void clear_certificate() { m_certificate.reset(); }

  bool all_finite() const;

private:
  std::vector<std::uint8_t> m_mask;
  std::optional<Certificate> m_certificate;
};

IndexBox full_node_box(const Grid& g);
IndexBox full_cell_box(const Grid& g);

} // namespace pqlip
