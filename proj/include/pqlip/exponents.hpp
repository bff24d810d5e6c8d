#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pqlip {

/// Nonnegative extended real used for integrability exponents.
///
/// Values are exact rationals whenever they come from decimal or rational
/// input (every finite double is converted through its shortest round-trip
/// decimal, so 2.1 means 21/10). Arithmetic between exact values stays
/// exact; any inexact operand demotes the result to double precision.
/// +inf is a first-class value; arithmetic on it throws, so formulas are
/// written in terms of reciprocals (1/inf == 0).
class ExtendedReal {
public:
  ExtendedReal() : ExtendedReal(0L) {}
  ExtendedReal(int v) : ExtendedReal(static_cast<long>(v)) {}
  ExtendedReal(long v);

  static ExtendedReal infinity();
  static ExtendedReal from_double(double v);
  static ExtendedReal inexact(double v);
  static ExtendedReal rational(long num, long den);
  static ExtendedReal from_mpq(const mpq_class& q);

  /// Accepts "inf", "infinity", decimals with optional exponent, and "a/b".
  static ExtendedReal parse(std::string_view text);

  bool is_infinite() const { return m_kind == Kind::infinite; }
  bool is_finite() const { return !is_infinite(); }
  bool is_exact() const { return m_kind != Kind::inexact; }
  bool is_zero() const;

  double to_double() const;
  /// Exact value; throws if the value is infinite or inexact.
  const mpq_class& exact() const;
  std::string to_string() const;

  /// 1/x with 1/inf = 0 and 1/0 = inf.
  ExtendedReal reciprocal() const;

  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b);
  friend ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b);
  friend ExtendedReal operator*(const ExtendedReal& a, const ExtendedReal& b);
  friend ExtendedReal operator/(const ExtendedReal& a, const ExtendedReal& b);
  ExtendedReal operator-() const;

  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return (a <=> b) == std::partial_ordering::equivalent;
  }

private:
  enum class Kind { exact, inexact, infinite };
  Kind m_kind = Kind::exact;
  mpq_class m_exact;
  double m_approx = 0.0;
};

enum class GapClass { regular, boundary, outside };

std::string to_string(GapClass c);

constexpr double kGapTolerance = 1e-12;

/// The exponent tuple (p, q, n, r, s) together with every derived exponent.
///
/// Preconditions checked on construction: 2 <= p <= q, n >= 1, r > n (or
/// r = inf), s >= 1 (or s = inf).
class ExponentProfile {
public:
  ExponentProfile(ExtendedReal p, ExtendedReal q, int n, ExtendedReal r, ExtendedReal s);

  const ExtendedReal& p() const { return m_p; }
  const ExtendedReal& q() const { return m_q; }
  int n() const { return m_n; }
  const ExtendedReal& r() const { return m_r; }
  const ExtendedReal& s() const { return m_s; }

  /// ps/(s+1); equals p for s = inf.
  ExtendedReal sigma() const;
  /// Right-hand side of the gap condition, (s/(s+1))(1 + 1/n - 1/r).
  ExtendedReal gap_threshold() const;
  ExtendedReal gap_margin() const;
  GapClass classify() const;

  /// 2ns/(n(s+1)-2s), the Sobolev conjugate of 2s/(s+1); inf when unbounded.
  ExtendedReal two_star_s() const;
  /// rs/(rs-2s-r); inf when 2/r + 1/s >= 1.
  ExtendedReal m() const;
  bool m_finite() const;

  /// 1/r + 1/s < 1/n, equivalently s > nr/(r-n).
  bool trudinger_condition() const;

  /// theta from the interpolation step; throws PreconditionError naming the
  /// violated inequality when the profile is not regular.
  ExtendedReal theta() const;
  /// Residual of 1 = theta tau/tau1 + (1-theta) tau/tau2, evaluated in double
  /// precision in the reciprocal form 1/tau = theta/tau1 + (1-theta)/tau2 and
  /// scaled by the size of its terms. The reciprocal form stays finite when m
  /// or 2*_s is unbounded (n = 1, or n = 2 with s = inf).
  double interpolation_residual() const;
  /// 2(q-p)2*_s / (p(2*_s - 2m)), written as 2(q-p) / (p(1 - 2m/2*_s)) with
  /// 1/2*_s = (n + n/s - 2)/(2n) so that n = 1 and n = 2, s = inf stay defined.
  ExtendedReal young_ratio() const;

private:
  ExtendedReal inv_r() const { return m_r.reciprocal(); }
  ExtendedReal inv_s() const { return m_s.reciprocal(); }
  ExtendedReal inv_n() const { return ExtendedReal::rational(1, m_n); }
  void require_regular(const char* what) const;

  ExtendedReal m_p, m_q;
  int m_n;
  ExtendedReal m_r, m_s;
};

GapClass gap_classify(const ExtendedReal& p, const ExtendedReal& q, int n, const ExtendedReal& r,
                      const ExtendedReal& s);

/// 1/r + 1/s < 1/n.
bool gap_implies_trudinger(int n, const ExtendedReal& r, const ExtendedReal& s);

struct CounterexampleWindow {
  bool a_inv_integrable = false; ///< alpha < 1/s
  bool k_integrable = false;     ///< alpha > 1 - 1/r
  bool window_nonempty = false;  ///< 1/r + 1/s > 1
  ExtendedReal alpha_lower;      ///< 1 - 1/r
  ExtendedReal alpha_upper;      ///< 1/s
};

/// One-dimensional |x|^alpha integrability table.
CounterexampleWindow counterexample_window(const ExtendedReal& alpha, const ExtendedReal& p,
                                           const ExtendedReal& r, const ExtendedReal& s);

/// Ratio used when the Sobolev conjugate is unbounded and any finite
/// exponent is admissible.
constexpr double kUnboundedConjugateRatio = 2.0;

struct MoserLadder {
  std::vector<double> exponents;   ///< p_0 = pm, p_i = p_0 ratio^i
  double ratio = 0.0;              ///< 2*_s / (2m)
  bool conjugate_unbounded = false;
  double reciprocal_sum = 0.0;     ///< closed form of sum_j 1/p_j over all j >= 0
};

MoserLadder moser_ladder(const ExtendedReal& p, int n, const ExtendedReal& r, const ExtendedReal& s,
                         std::size_t i_max);

ExtendedReal theta_exponent(const ExtendedReal& p, const ExtendedReal& q, int n,
                            const ExtendedReal& r, const ExtendedReal& s);

bool young_exponent_check(const ExtendedReal& p, const ExtendedReal& q, int n,
                          const ExtendedReal& r, const ExtendedReal& s);

struct PowerWeightExponents {
  ExtendedReal s_max; ///< |x|^{-alpha s} locally integrable iff s < n/alpha
  ExtendedReal r_max; ///< |x|^{(alpha-1) r} locally integrable iff r < n/(1-alpha)
};

/// Integrability thresholds of the weight |x|^alpha in dimension n; the n = 1
/// case is the classical one-dimensional table, n > 1 uses polar coordinates.
PowerWeightExponents power_weight_exponents(const ExtendedReal& alpha, int n);

/// n sigma / (n - sigma) when sigma < n, inf otherwise.
ExtendedReal sobolev_conjugate(const ExtendedReal& sigma, int n);

} // namespace pqlip
