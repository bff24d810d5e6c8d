#include "pqlip/kernels.hpp"

#include <cmath>
#include <limits>

namespace pqlip::kernels {
namespace {

void grad_1d(const double* u, std::size_t ncells, double inv_h, double* g) {
  for (std::size_t i = 0; i < ncells; ++i) g[i] = (u[i + 1] - u[i]) * inv_h;
}

void grad_2d(const double* u, std::size_t nx, std::size_t ny, double inv_2h, double* gx, double* gy) {
  const std::size_t cx = nx - 1;
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    const double* r0 = u + j * nx;
    const double* r1 = r0 + nx;
    for (std::size_t i = 0; i < cx; ++i) {
      const double a = r0[i], b = r0[i + 1], c = r1[i], d = r1[i + 1];
      gx[j * cx + i] = ((b - a) + (d - c)) * inv_2h;
      gy[j * cx + i] = ((c - a) + (d - b)) * inv_2h;
    }
  }
}

void sum_squares(const double* g, std::size_t n, bool accumulate, double* s) {
  if (accumulate) {
    for (std::size_t i = 0; i < n; ++i) s[i] += g[i] * g[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) s[i] = g[i] * g[i];
  }
}

void radial_term(const double* s, const double* w, double w_const, std::size_t n, const TermSpec& spec,
                 double* v, double* d1, double* d2) {
  const double e = spec.exponent;
  const double half = 0.5 * e;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double si = s[i];
    const double wi = w ? w[i] : w_const;
    double tv = 0.0, t1 = 0.0, t2 = 0.0;
    switch (spec.kind) {
      case TermSpec::Kind::smoothed:
        if (e == 2.0) {
          tv = wi * si;
          t1 = 2.0 * wi;
        } else {
          const double l = std::log1p(si);
          const double p = std::exp((half - 2.0) * l);
          tv = wi * std::expm1(half * l);
          t1 = wi * e * p * (1.0 + si);
          t2 = wi * e * (e - 2.0) * p;
        }
        break;
      case TermSpec::Kind::pure:
        if (e == 2.0) {
          tv = wi * si;
          t1 = 2.0 * wi;
        } else if (si > 0.0) {
          const double l = std::log(si);
          const double p = std::exp((half - 2.0) * l);
          tv = wi * std::exp(half * l);
          t1 = wi * e * p * si;
          t2 = wi * e * (e - 2.0) * p;
        } else {
          t1 = e > 2.0 ? 0.0 : inf;
        }
        break;
      case TermSpec::Kind::barrier: {
        const double room = spec.cap2 - si;
        if (room > 0.0) {
          tv = -spec.mu * std::log1p(-si / spec.cap2);
          t1 = 2.0 * spec.mu / room;
          t2 = 4.0 * spec.mu / (room * room);
        } else {
          tv = inf;
          t1 = inf;
          t2 = inf;
        }
        break;
      }
    }
    v[i] += tv;
    if (d1) d1[i] += t1;
    if (d2) d2[i] += t2;
  }
}

void scaled_product(const double* a, const double* b, double scale, std::size_t n, double* f) {
  for (std::size_t i = 0; i < n; ++i) f[i] = scale * a[i] * b[i];
}

void hess_flux(const double* d1, const double* d2, const double* g, const double* dv, const double* dot,
               double scale, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * (d1[i] * dv[i] + d2[i] * g[i] * dot[i]);
}

void dot_accumulate(const double* a, const double* b, std::size_t n, bool accumulate, double* dot) {
  if (accumulate) {
    for (std::size_t i = 0; i < n; ++i) dot[i] += a[i] * b[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) dot[i] = a[i] * b[i];
  }
}

void div_1d(const double* f, std::size_t ncells, double inv_h, double* out) {
  for (std::size_t i = 0; i <= ncells; ++i) {
    const double left = i > 0 ? f[i - 1] : 0.0;
    const double right = i < ncells ? f[i] : 0.0;
    out[i] = (left - right) * inv_h;
  }
}

void div_2d(const double* fx, const double* fy, std::size_t nx, std::size_t ny, double inv_2h, double* out) {
  const std::size_t cx = nx - 1, cy = ny - 1;
  // Node (i,j) touches cells (i-1,j-1), (i,j-1), (i-1,j), (i,j) with signs
  // (+,+), (-,+), (+,-), (-,-) on (fx, fy).
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      double acc = 0.0;
      if (j > 0) {
        const std::size_t row = (j - 1) * cx;
        if (i > 0) acc += fx[row + i - 1] + fy[row + i - 1];
        if (i < cx) acc += -fx[row + i] + fy[row + i];
      }
      if (j < cy) {
        const std::size_t row = j * cx;
        if (i > 0) acc += fx[row + i - 1] - fy[row + i - 1];
        if (i < cx) acc += -fx[row + i] - fy[row + i];
      }
      out[j * nx + i] = acc * inv_2h;
    }
  }
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 32) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  const std::size_t half = (n / 2 + 15) & ~std::size_t{15};
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

} // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet set{"scalar",       grad_1d,   grad_2d, sum_squares, radial_term, scaled_product,
                             hess_flux,      dot_accumulate, div_1d, div_2d, pairwise_sum};
  return set;
}

} // namespace pqlip::kernels
