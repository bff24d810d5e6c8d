#include "pqlip/operators.hpp"

#include "pqlip/energy.hpp"
#include "pqlip/errors.hpp"
#include "pqlip/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pqlip {

LatticeArray lattice_gradient(const LatticeArray& in) {
  const Grid& g = in.grid();
  const int dim = g.dim();
  const double h = g.spacing();
  Stagger out_stagger = in.stagger();
  IndexBox box = in.box();
  long off[2] = {0, 0};
  for (int a = 0; a < dim; ++a) {
    out_stagger.half[a] = 1 - in.stagger().half[a];
    if (in.stagger().half[a] == 0) {
      // nodes -> cells: cell k sits between nodes k and k+1
      box.hi[a] = box.hi[a] > box.lo[a] ? box.hi[a] - 1 : box.lo[a];
      off[a] = 0;
    } else {
      // cells -> nodes: node k sits between cells k-1 and k
      box.lo[a] = box.lo[a] + 1;
      box.hi[a] = std::max(box.hi[a], box.lo[a]);
      off[a] = -1;
    }
  }
  const std::size_t width = in.width();
  LatticeArray out(g, out_stagger, box, width * dim);
  if (box.size() == 0) return out;
  for (std::size_t k = 0; k < width; ++k) {
    out.for_each([&](std::size_t i, std::size_t j, std::size_t) {
      const std::size_t i0 = static_cast<std::size_t>(static_cast<long>(i) + off[0]);
      if (dim == 1) {
        out.at(k, i, j) = (in.at(k, i0 + 1, j) - in.at(k, i0, j)) / h;
        return;
      }
      const std::size_t j0 = static_cast<std::size_t>(static_cast<long>(j) + off[1]);
      const double a = in.at(k, i0, j0), b = in.at(k, i0 + 1, j0);
      const double c = in.at(k, i0, j0 + 1), d = in.at(k, i0 + 1, j0 + 1);
      out.at(2 * k, i, j) = ((b - a) + (d - c)) / (2.0 * h);
      out.at(2 * k + 1, i, j) = ((c - a) + (d - b)) / (2.0 * h);
    });
  }
  return out;
}

CellArray discrete_gradient(const DiscreteField& u) { return lattice_gradient(u); }

LatticeArray discrete_second_differences(const DiscreteField& u) { return lattice_gradient(lattice_gradient(u)); }

LatticeArray partial_difference(const DiscreteField& u, int axis) {
  const Grid& g = u.grid();
  if (axis < 0 || axis >= g.dim()) throw IndexError("difference axis out of range");
  Stagger st = u.stagger();
  st.half[axis] = 1;
  IndexBox box = u.box();
  if (box.extent(axis) < 2) throw IndexError("field too small to difference");
  box.hi[axis] -= 1;
  LatticeArray out(g, st, box, u.width());
  const double h = g.spacing();
  for (std::size_t k = 0; k < u.width(); ++k) {
    out.for_each([&](std::size_t i, std::size_t j, std::size_t) {
      const std::size_t i1 = axis == 0 ? i + 1 : i;
      const std::size_t j1 = axis == 1 ? j + 1 : j;
      out.at(k, i, j) = (u.at(k, i1, j1) - u.at(k, i, j)) / h;
    });
  }
  return out;
}

double discrete_energy(const Density& d, const DiscreteField& u) {
  const DiscreteEnergy e(d, u.grid(), u.components());
  return e.value(u);
}

namespace {

IndexBox shifted_box(const LatticeArray& u, int axis, long steps) {
  if (axis < 0 || axis >= u.grid().dim()) throw IndexError("shift axis out of range");
  IndexBox box = u.box();
  const std::size_t mag = static_cast<std::size_t>(steps < 0 ? -steps : steps);
  if (mag >= box.extent(axis)) throw IndexError("shift of " + std::to_string(steps) + " exceeds the grid");
  if (steps >= 0) box.hi[axis] -= mag;
  else box.lo[axis] += mag;
  return box;
}

template <class Out> void fill_shift(const LatticeArray& u, int axis, long steps, Out& out) {
  for (std::size_t k = 0; k < u.width(); ++k) {
    out.for_each([&](std::size_t i, std::size_t j, std::size_t) {
      const std::size_t i1 = axis == 0 ? static_cast<std::size_t>(static_cast<long>(i) + steps) : i;
      const std::size_t j1 = axis == 1 ? static_cast<std::size_t>(static_cast<long>(j) + steps) : j;
      out.at(k, i, j) = u.at(k, i1, j1) - u.at(k, i, j);
    });
  }
}

} // namespace

DiscreteField tau_shift(const DiscreteField& u, int axis, long steps) {
  DiscreteField out(u.grid(), u.components(), shifted_box(u, axis, steps));
  fill_shift(u, axis, steps, out);
  return out;
}

LatticeArray tau_shift(const LatticeArray& u, int axis, long steps) {
  LatticeArray out(u.grid(), u.stagger(), shifted_box(u, axis, steps), u.width());
  fill_shift(u, axis, steps, out);
  return out;
}

double region_measure(const LatticeArray& a, const Region& region) {
  const int dim = a.grid().dim();
  std::size_t count = 0;
  a.for_each([&](std::size_t i, std::size_t j, std::size_t) {
    const auto pt = a.point(i, j);
    if (region.contains(std::span<const double>(pt.data(), dim))) ++count;
  });
  return static_cast<double>(count) * a.grid().cell_volume();
}

double norm_lt(const LatticeArray& a, double t, const Region& region, bool mean) {
  if (!(t >= 1.0)) throw PreconditionError("norm exponent must be >= 1");
  const int dim = a.grid().dim();
  std::vector<double> terms;
  terms.reserve(a.points());
  double mx = 0.0;
  a.for_each([&](std::size_t i, std::size_t j, std::size_t) {
    const auto pt = a.point(i, j);
    if (!region.contains(std::span<const double>(pt.data(), dim))) return;
    const double m = a.magnitude(i, j);
    mx = std::max(mx, m);
    terms.push_back(m);
  });
  if (terms.empty()) return 0.0;
  if (std::isinf(t)) return mx;
  for (double& v : terms) v = std::pow(v, t);
  double total = a.grid().cell_volume() * pairwise_sum(terms);
  if (mean) total /= static_cast<double>(terms.size()) * a.grid().cell_volume();
  return std::pow(total, 1.0 / t);
}

double pairwise_sum(std::span<const double> x) { return kernels::active().pairwise_sum(x.data(), x.size()); }

} // namespace pqlip
