#include "pqlip/kernels.hpp"
#include "vecmath_avx2.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace pqlip::kernels {
namespace {

const KernelSet& ref() { return scalar_kernels(); }

void grad_1d(const double* u, std::size_t ncells, double inv_h, double* g) {
  const __m256d s = _mm256_set1_pd(inv_h);
  std::size_t i = 0;
  for (; i + 4 <= ncells; i += 4) {
    const __m256d a = _mm256_loadu_pd(u + i);
    const __m256d b = _mm256_loadu_pd(u + i + 1);
    _mm256_storeu_pd(g + i, _mm256_mul_pd(_mm256_sub_pd(b, a), s));
  }
  for (; i < ncells; ++i) g[i] = (u[i + 1] - u[i]) * inv_h;
}

void grad_2d(const double* u, std::size_t nx, std::size_t ny, double inv_2h, double* gx, double* gy) {
  const std::size_t cx = nx - 1;
  const __m256d s = _mm256_set1_pd(inv_2h);
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    const double* r0 = u + j * nx;
    const double* r1 = r0 + nx;
    double* ox = gx + j * cx;
    double* oy = gy + j * cx;
    std::size_t i = 0;
    for (; i + 4 <= cx; i += 4) {
      const __m256d a = _mm256_loadu_pd(r0 + i);
      const __m256d b = _mm256_loadu_pd(r0 + i + 1);
      const __m256d c = _mm256_loadu_pd(r1 + i);
      const __m256d d = _mm256_loadu_pd(r1 + i + 1);
      _mm256_storeu_pd(ox + i, _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(b, a), _mm256_sub_pd(d, c)), s));
      _mm256_storeu_pd(oy + i, _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(c, a), _mm256_sub_pd(d, b)), s));
    }
    for (; i < cx; ++i) {
      const double a = r0[i], b = r0[i + 1], c = r1[i], d = r1[i + 1];
      ox[i] = ((b - a) + (d - c)) * inv_2h;
      oy[i] = ((c - a) + (d - b)) * inv_2h;
    }
  }
}

void sum_squares(const double* g, std::size_t n, bool accumulate, double* s) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(g + i);
    const __m256d base = accumulate ? _mm256_loadu_pd(s + i) : _mm256_setzero_pd();
    _mm256_storeu_pd(s + i, _mm256_fmadd_pd(x, x, base));
  }
  ref().sum_squares(g + i, n - i, accumulate, s + i);
}

void radial_term(const double* s, const double* w, double w_const, std::size_t n, const TermSpec& spec,
                 double* v, double* d1, double* d2) {
  const double e = spec.exponent;
  // Pure powers need a branch at s == 0 and the barrier is cheap and rare;
  // only the smoothed profile, which dominates every solve, is vectorized.
  if (spec.kind != TermSpec::Kind::smoothed) {
    ref().radial_term(s, w, w_const, n, spec, v, d1, d2);
    return;
  }
  std::size_t i = 0;
  const __m256d wc = _mm256_set1_pd(w_const);
  if (e == 2.0) {
    const __m256d two = _mm256_set1_pd(2.0);
    for (; i + 4 <= n; i += 4) {
      const __m256d wi = w ? _mm256_loadu_pd(w + i) : wc;
      const __m256d si = _mm256_loadu_pd(s + i);
      _mm256_storeu_pd(v + i, _mm256_fmadd_pd(wi, si, _mm256_loadu_pd(v + i)));
      if (d1) _mm256_storeu_pd(d1 + i, _mm256_fmadd_pd(two, wi, _mm256_loadu_pd(d1 + i)));
    }
  } else {
    const __m256d half = _mm256_set1_pd(0.5 * e);
    const __m256d half_m2 = _mm256_set1_pd(0.5 * e - 2.0);
    const __m256d ee = _mm256_set1_pd(e);
    const __m256d ee2 = _mm256_set1_pd(e * (e - 2.0));
    const __m256d one = _mm256_set1_pd(1.0);
    for (; i + 4 <= n; i += 4) {
      const __m256d wi = w ? _mm256_loadu_pd(w + i) : wc;
      const __m256d si = _mm256_loadu_pd(s + i);
      const __m256d l = vm::log1p(si);
      const __m256d p = vm::exp(_mm256_mul_pd(half_m2, l));
      const __m256d tv = _mm256_mul_pd(wi, vm::expm1(_mm256_mul_pd(half, l)));
      _mm256_storeu_pd(v + i, _mm256_add_pd(_mm256_loadu_pd(v + i), tv));
      if (d1) {
        const __m256d t1 = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(wi, ee), p), _mm256_add_pd(one, si));
        _mm256_storeu_pd(d1 + i, _mm256_add_pd(_mm256_loadu_pd(d1 + i), t1));
      }
      if (d2) {
        const __m256d t2 = _mm256_mul_pd(_mm256_mul_pd(wi, ee2), p);
        _mm256_storeu_pd(d2 + i, _mm256_add_pd(_mm256_loadu_pd(d2 + i), t2));
      }
    }
  }
  ref().radial_term(s + i, w ? w + i : nullptr, w_const, n - i, spec, v + i, d1 ? d1 + i : nullptr,
                    d2 ? d2 + i : nullptr);
}

void scaled_product(const double* a, const double* b, double scale, std::size_t n, double* f) {
  const __m256d sc = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(f + i, _mm256_mul_pd(_mm256_mul_pd(sc, _mm256_loadu_pd(a + i)), _mm256_loadu_pd(b + i)));
  ref().scaled_product(a + i, b + i, scale, n - i, f + i);
}

void hess_flux(const double* d1, const double* d2, const double* g, const double* dv, const double* dot,
               double scale, std::size_t n, double* out) {
  const __m256d sc = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(d1 + i), _mm256_loadu_pd(dv + i));
    const __m256d b = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(d2 + i), _mm256_loadu_pd(g + i)),
                                    _mm256_loadu_pd(dot + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(sc, _mm256_add_pd(a, b)));
  }
  ref().hess_flux(d1 + i, d2 + i, g + i, dv + i, dot + i, scale, n - i, out + i);
}

void dot_accumulate(const double* a, const double* b, std::size_t n, bool accumulate, double* dot) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d base = accumulate ? _mm256_loadu_pd(dot + i) : _mm256_setzero_pd();
    _mm256_storeu_pd(dot + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), base));
  }
  ref().dot_accumulate(a + i, b + i, n - i, accumulate, dot + i);
}

void div_1d(const double* f, std::size_t ncells, double inv_h, double* out) {
  out[0] = -f[0] * inv_h;
  const __m256d s = _mm256_set1_pd(inv_h);
  std::size_t i = 1;
  for (; i + 4 <= ncells; i += 4) {
    const __m256d l = _mm256_loadu_pd(f + i - 1);
    const __m256d r = _mm256_loadu_pd(f + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(l, r), s));
  }
  for (; i < ncells; ++i) out[i] = (f[i - 1] - f[i]) * inv_h;
  out[ncells] = f[ncells - 1] * inv_h;
}

void div_2d(const double* fx, const double* fy, std::size_t nx, std::size_t ny, double inv_2h, double* out) {
  // Boundary nodes through the reference gather, interior rows vectorized.
  ref().div_2d(fx, fy, nx, ny, inv_2h, out);
  if (nx < 3 || ny < 3) return;
  const std::size_t cx = nx - 1;
  const __m256d s = _mm256_set1_pd(inv_2h);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    const double* bx = fx + (j - 1) * cx; // cells below
    const double* by = fy + (j - 1) * cx;
    const double* tx = fx + j * cx;       // cells above
    const double* ty = fy + j * cx;
    double* o = out + j * nx;
    std::size_t i = 1;
    for (; i + 4 <= nx - 1; i += 4) {
      const __m256d bxl = _mm256_loadu_pd(bx + i - 1), bxr = _mm256_loadu_pd(bx + i);
      const __m256d byl = _mm256_loadu_pd(by + i - 1), byr = _mm256_loadu_pd(by + i);
      const __m256d txl = _mm256_loadu_pd(tx + i - 1), txr = _mm256_loadu_pd(tx + i);
      const __m256d tyl = _mm256_loadu_pd(ty + i - 1), tyr = _mm256_loadu_pd(ty + i);
      __m256d acc = _mm256_add_pd(bxl, byl);
      acc = _mm256_add_pd(acc, _mm256_sub_pd(byr, bxr));
      acc = _mm256_add_pd(acc, _mm256_sub_pd(txl, tyl));
      acc = _mm256_sub_pd(acc, _mm256_add_pd(txr, tyr));
      _mm256_storeu_pd(o + i, _mm256_mul_pd(acc, s));
    }
  }
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 128) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
      a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
      a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(a0, a1));
    double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) acc += x[i];
    return acc;
  }
  const std::size_t half = (n / 2 + 15) & ~std::size_t{15};
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

} // namespace

const KernelSet& avx2_kernels() {
  static const KernelSet set{"avx2",    grad_1d,        grad_2d, sum_squares, radial_term, scaled_product,
                             hess_flux, dot_accumulate, div_1d,  div_2d,      pairwise_sum};
  return set;
}

} // namespace pqlip::kernels
