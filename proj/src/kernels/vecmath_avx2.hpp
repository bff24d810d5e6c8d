#pragma once

// Four-lane double-precision log/exp for AVX2+FMA, after the Cephes
// rational approximations. Accuracy is a few ulp over the finite range;
// inputs outside the domain follow IEEE conventions (log(0) = -inf,
// log(x<0) = nan, exp overflow = inf).

#include <immintrin.h>

namespace pqlip::kernels::vm {

inline __m256d poly(__m256d x, const double* c, int n) {
  __m256d r = _mm256_set1_pd(c[0]);
  for (int k = 1; k < n; ++k) r = _mm256_fmadd_pd(r, x, _mm256_set1_pd(c[k]));
  return r;
}

inline __m256d exp(__m256d x) {
  static const double P[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2, 9.99999999999999999910e-1};
  static const double Q[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3, 2.27265548208155028766e-1,
                             2.00000000000000000009e0};
  const __m256d hi = _mm256_set1_pd(709.78);
  const __m256d lo = _mm256_set1_pd(-745.2);
  const __m256d overflow = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  const __m256d nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d fx = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(1.4426950408889634073599)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  xc = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125e-1), xc);
  xc = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212e-6), xc);

  const __m256d xx = _mm256_mul_pd(xc, xc);
  const __m256d px = _mm256_mul_pd(xc, poly(xx, P, 3));
  const __m256d qx = poly(xx, Q, 4);
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

  // Scale by 2^fx in two halves so that subnormal results survive.
  const __m128i n = _mm256_cvtpd_epi32(fx);
  const __m128i n1 = _mm_srai_epi32(n, 1);
  const __m128i n2 = _mm_sub_epi32(n, n1);
  auto pow2 = [](__m128i k) {
    const __m256i k64 = _mm256_cvtepi32_epi64(k);
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52));
  };
  r = _mm256_mul_pd(_mm256_mul_pd(r, pow2(n1)), pow2(n2));

  r = _mm256_blendv_pd(r, _mm256_set1_pd(__builtin_inf()), overflow);
  r = _mm256_blendv_pd(r, _mm256_setzero_pd(), underflow);
  r = _mm256_blendv_pd(r, x, nan);
  return r;
}

inline __m256d log(__m256d x) {
  static const double P[] = {1.01875663804580931796e-4, 4.97494994976747001425e-1, 4.70579119878881725854e0,
                             1.44989225341610930846e1,  1.79368678507819816313e1,  7.70838733755885391666e0};
  static const double Q[] = {1.0, 1.12873587189167450590e1, 4.52279145837532221105e1, 8.29875266912776603211e1,
                             7.11544750618563894466e1, 2.31251620126765340583e1};

  const __m256d zero = _mm256_setzero_pd();
  const __m256d is_zero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
  const __m256d is_neg = _mm256_cmp_pd(x, zero, _CMP_LT_OQ);
  const __m256d is_inf = _mm256_cmp_pd(x, _mm256_set1_pd(__builtin_inf()), _CMP_EQ_OQ);
  const __m256d is_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);

  // Normalize subnormals.
  const __m256d tiny = _mm256_cmp_pd(x, _mm256_set1_pd(2.2250738585072014e-308), _CMP_LT_OQ);
  __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(18014398509481984.0)), tiny);
  const __m256d ebias = _mm256_blendv_pd(zero, _mm256_set1_pd(54.0), tiny);

  // Split xs = m * 2^e with m in [0.5, 1).
  const __m256i bits = _mm256_castpd_si256(xs);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask),
                                                  _mm256_set1_epi64x(0x3FE0000000000000LL)));
  // exponent as double: (exp_bits - 1022)
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_bits, magic)),
                            _mm256_set1_pd(4503599627370496.0 + 1022.0));
  e = _mm256_sub_pd(e, ebias);

  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
  const __m256d small = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
  m = _mm256_add_pd(m, _mm256_and_pd(small, m));
  m = _mm256_sub_pd(m, _mm256_set1_pd(1.0));

  const __m256d z = _mm256_mul_pd(m, m);
  __m256d y = _mm256_mul_pd(m, _mm256_mul_pd(z, _mm256_div_pd(poly(m, P, 6), poly(m, Q, 6))));
  y = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d r = _mm256_add_pd(m, y);
  r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);

  r = _mm256_blendv_pd(r, _mm256_set1_pd(-__builtin_inf()), is_zero);
  r = _mm256_blendv_pd(r, _mm256_set1_pd(__builtin_nan("")), is_neg);
  r = _mm256_blendv_pd(r, x, is_inf);
  r = _mm256_blendv_pd(r, x, is_nan);
  return r;
}

/// log(1+x) with the compensated trick log(u) - ((u-1)-x)/u, u = 1+x.
inline __m256d log1p(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d u = _mm256_add_pd(one, x);
  const __m256d lu = log(u);
  const __m256d corr = _mm256_div_pd(_mm256_sub_pd(_mm256_sub_pd(u, one), x), u);
  const __m256d exact = _mm256_cmp_pd(u, one, _CMP_EQ_OQ);
  const __m256d big = _mm256_cmp_pd(u, _mm256_set1_pd(1e300), _CMP_GT_OQ);
  __m256d r = _mm256_sub_pd(lu, corr);
  r = _mm256_blendv_pd(r, lu, big);
  return _mm256_blendv_pd(r, x, exact);
}

/// exp(x)-1 via Kahan's (u-1) x / log(u), u = exp(x).
inline __m256d expm1(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d u = exp(x);
  const __m256d um1 = _mm256_sub_pd(u, one);
  const __m256d lu = log(u);
  __m256d r = _mm256_div_pd(_mm256_mul_pd(um1, x), lu);
  const __m256d tiny = _mm256_cmp_pd(u, one, _CMP_EQ_OQ);
  const __m256d neg_one = _mm256_cmp_pd(um1, _mm256_set1_pd(-1.0), _CMP_EQ_OQ);
  const __m256d large = _mm256_cmp_pd(x, _mm256_set1_pd(40.0), _CMP_GT_OQ);
  r = _mm256_blendv_pd(r, um1, _mm256_or_pd(neg_one, large));
  return _mm256_blendv_pd(r, x, tiny);
}

} // namespace pqlip::kernels::vm
