#pragma once

// Per-cell arithmetic kernels behind the discrete energy, its gradient and
// its Hessian. Every kernel has a scalar reference implementation; an
// AVX2/FMA implementation is selected at runtime when the CPU supports it.
// The environment variable PQLIP_KERNELS=scalar|avx2 forces a choice.

#include <cstddef>
#include <string_view>
#include <vector>

namespace pqlip::kernels {

/// One radial contribution psi(s), s = |xi|^2, to a density:
///   smoothed: w ((1+s)^{e/2} - 1)
///   pure:     w s^{e/2}
///   barrier:  -mu log(1 - s/cap2)      (w ignored)
/// radial_term accumulates v += psi, d1 += 2 psi'(s), d2 += 4 psi''(s), so
/// that grad_xi = d1 xi and <hess lam, lam> = d1 |lam|^2 + d2 <xi, lam>^2.
struct TermSpec {
  enum class Kind { smoothed, pure, barrier };
  Kind kind = Kind::smoothed;
  double exponent = 2.0;
  double cap2 = 0.0;
  double mu = 0.0;
};

struct KernelSet {
  const char* name;

  /// g[i] = (u[i+1] - u[i]) * inv_h for i < ncells.
  void (*grad_1d)(const double* u, std::size_t ncells, double inv_h, double* g);

  /// Bilinear-cell gradient on an nx-by-ny node array (x fastest). Cells are
  /// (nx-1)-by-(ny-1), x fastest. inv_2h = 1/(2h).
  void (*grad_2d)(const double* u, std::size_t nx, std::size_t ny, double inv_2h, double* gx, double* gy);

  /// s[i] (+)= g[i]^2.
  void (*sum_squares)(const double* g, std::size_t n, bool accumulate, double* s);

  /// See TermSpec. w may be null, in which case w_const is used. d1/d2 may
  /// be null when not needed.
  void (*radial_term)(const double* s, const double* w, double w_const, std::size_t n, const TermSpec& spec,
                      double* v, double* d1, double* d2);

  /// f[i] = scale * a[i] * b[i].
  void (*scaled_product)(const double* a, const double* b, double scale, std::size_t n, double* f);

  /// Hessian flux for one gradient slot k:
  ///   out[i] = scale * (d1[i] * dv[i] + d2[i] * g[i] * dot[i]).
  void (*hess_flux)(const double* d1, const double* d2, const double* g, const double* dv, const double* dot,
                    double scale, std::size_t n, double* out);

  /// dot[i] (+)= a[i] * b[i].
  void (*dot_accumulate)(const double* a, const double* b, std::size_t n, bool accumulate, double* dot);

  /// Transpose of grad_1d: out[i] = (f[i-1] - f[i]) * inv_h over ncells+1 nodes.
  void (*div_1d)(const double* f, std::size_t ncells, double inv_h, double* out);

  /// Transpose of grad_2d on nx-by-ny nodes.
  void (*div_2d)(const double* fx, const double* fy, std::size_t nx, std::size_t ny, double inv_2h,
                 double* out);

  /// Deterministic pairwise sum.
  double (*pairwise_sum)(const double* x, std::size_t n);
};

const KernelSet& scalar_kernels();

/// True when the AVX2/FMA set was compiled in and the CPU supports it.
bool avx2_available();
const KernelSet& avx2_kernels();

/// The set chosen for this process (cached after the first call).
const KernelSet& active();

/// Look up a set by name ("scalar", "avx2", "auto"); throws if unavailable.
const KernelSet& by_name(std::string_view name);

/// Names of the sets usable on this machine.
std::vector<std::string_view> available();

} // namespace pqlip::kernels
