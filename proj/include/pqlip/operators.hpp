#pragma once

#include "pqlip/density.hpp"
#include "pqlip/grid.hpp"

#include <span>

namespace pqlip {

/// Per-cell N x dim gradient: forward difference in 1D, bilinear-cell
/// average of edge differences in 2D. Exact on affine fields.
CellArray discrete_gradient(const DiscreteField& u);

/// Same stencil applied to any lattice array: maps node-centred data to the
/// cells between them and cell-centred data to the interior nodes, with
/// `width * dim` output slots (slot k*dim + a is d/dx_a of input slot k).
LatticeArray lattice_gradient(const LatticeArray& in);

/// Node-indexed N x dim x dim second differences on interior nodes (slot
/// (c*dim + a)*dim + b). Obtained by differencing the cell gradient back to
/// nodes, which is exact on quadratics.
LatticeArray discrete_second_differences(const DiscreteField& u);

/// Edge differences along `axis`: (u(x + h e_axis) - u(x)) / h, one entry
/// per edge, `components` slots.
LatticeArray partial_difference(const DiscreteField& u, int axis);

/// Midpoint-rule energy: sum over cells of cell_volume * f(cell centre, Du).
double discrete_energy(const Density& d, const DiscreteField& u);

/// u(x + steps h e_axis) - u(x) on the nodes where both points exist.
DiscreteField tau_shift(const DiscreteField& u, int axis, long steps);
/// Same shift on any lattice array.
LatticeArray tau_shift(const LatticeArray& u, int axis, long steps);

/// (sum over points in `region` of volume |v|^t)^{1/t} with |v| the
/// Euclidean norm across slots; t = +inf gives the max. With `mean` the sum
/// is divided by the total measure first.
double norm_lt(const LatticeArray& a, double t, const Region& region = {}, bool mean = false);

/// Measure (volume) of the lattice points of `a` inside `region`.
double region_measure(const LatticeArray& a, const Region& region);

/// Deterministic pairwise sum via the active kernel set.
double pairwise_sum(std::span<const double> x);

} // namespace pqlip
