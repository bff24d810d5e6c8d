#include "pqlip/exponents.hpp"

#include "pqlip/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace pqlip {

namespace {

mpq_class pow10(long e) {
  mpz_class ten = 10, out;
  mpz_pow_ui(out.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? mpq_class(mpz_class(1), out) : mpq_class(out);
}

// Exact value of a decimal literal such as "-12.5e-3".
mpq_class parse_decimal(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long scale = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_point)
        --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit)
    throw PreconditionError("not a number: '" + std::string(text) + "'");
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E')
      throw PreconditionError("not a number: '" + std::string(text) + "'");
    long e = 0;
    auto tail = text.substr(i + 1);
    if (!tail.empty() && tail.front() == '+')
      tail.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), e);
    if (ec != std::errc() || ptr != tail.data() + tail.size())
      throw PreconditionError("bad exponent in '" + std::string(text) + "'");
    scale += e;
  }
  mpq_class value(mpz_class(digits, 10));
  value *= pow10(scale);
  value.canonicalize();
  return negative ? mpq_class(-value) : value;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return std::string(s.substr(b, e - b));
}

} // namespace

ExtendedReal::ExtendedReal(long v) : m_kind(Kind::exact), m_exact(v) {}

ExtendedReal ExtendedReal::infinity() {
  ExtendedReal x;
  x.m_kind = Kind::infinite;
  x.m_approx = std::numeric_limits<double>::infinity();
  return x;
}

ExtendedReal ExtendedReal::from_double(double v) {
  if (std::isnan(v))
    throw PreconditionError("NaN is not an extended real");
  if (std::isinf(v)) {
    if (v < 0)
      throw PreconditionError("-inf is not supported");
    return infinity();
  }
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return from_mpq(parse_decimal(std::string_view(buf.data(), ptr - buf.data())));
}

ExtendedReal ExtendedReal::inexact(double v) {
  if (std::isinf(v) && v > 0)
    return infinity();
  if (!std::isfinite(v))
    throw PreconditionError("non-finite inexact value");
  ExtendedReal x;
  x.m_kind = Kind::inexact;
  x.m_approx = v;
  return x;
}

ExtendedReal ExtendedReal::rational(long num, long den) {
  if (den == 0)
    throw PreconditionError("zero denominator");
  mpq_class q(num, den);
  q.canonicalize();
  return from_mpq(q);
}

ExtendedReal ExtendedReal::from_mpq(const mpq_class& q) {
  ExtendedReal x;
  x.m_kind = Kind::exact;
  x.m_exact = q;
  return x;
}

ExtendedReal ExtendedReal::parse(std::string_view raw) {
  std::string text = trim(raw);
  std::string lower;
  for (char c : text)
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "inf" || lower == "+inf" || lower == "infinity" || lower == "∞")
    return infinity();
  if (auto slash = text.find('/'); slash != std::string::npos) {
    mpq_class num = parse_decimal(trim(std::string_view(text).substr(0, slash)));
    mpq_class den = parse_decimal(trim(std::string_view(text).substr(slash + 1)));
    if (den == 0)
      throw PreconditionError("zero denominator in '" + text + "'");
    mpq_class q = num / den;
    q.canonicalize();
    return from_mpq(q);
  }
  return from_mpq(parse_decimal(text));
}

bool ExtendedReal::is_zero() const {
  switch (m_kind) {
  case Kind::exact:
    return m_exact == 0;
  case Kind::inexact:
    return m_approx == 0.0;
  default:
    return false;
  }
}

double ExtendedReal::to_double() const {
  switch (m_kind) {
  case Kind::exact:
    return m_exact.get_d();
  case Kind::inexact:
    return m_approx;
  default:
    return std::numeric_limits<double>::infinity();
  }
}

const mpq_class& ExtendedReal::exact() const {
  if (m_kind != Kind::exact)
    throw PreconditionError("value has no exact representation");
  return m_exact;
}

std::string ExtendedReal::to_string() const {
  switch (m_kind) {
  case Kind::exact:
    return m_exact.get_str();
  case Kind::inexact: {
    std::ostringstream os;
    os.precision(17);
    os << m_approx;
    return os.str();
  }
  default:
    return "inf";
  }
}

ExtendedReal ExtendedReal::reciprocal() const {
  if (is_infinite())
    return ExtendedReal(0L);
  if (is_zero())
    return infinity();
  if (m_kind == Kind::exact)
    return from_mpq(mpq_class(1) / m_exact);
  return inexact(1.0 / m_approx);
}

namespace {

template <class ExactOp, class FloatOp>
ExtendedReal combine(const ExtendedReal& a, const ExtendedReal& b, ExactOp exact_op, FloatOp float_op,
                     const char* name) {
  if (a.is_infinite() || b.is_infinite())
    throw PreconditionError(std::string("arithmetic '") + name + "' on an infinite exponent");
  if (a.is_exact() && b.is_exact())
    return ExtendedReal::from_mpq(exact_op(a.exact(), b.exact()));
  return ExtendedReal::inexact(float_op(a.to_double(), b.to_double()));
}

} // namespace

ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
  return combine(
      a, b, [](const mpq_class& x, const mpq_class& y) { return mpq_class(x + y); },
      [](double x, double y) { return x + y; }, "+");
}

ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b) {
  return combine(
      a, b, [](const mpq_class& x, const mpq_class& y) { return mpq_class(x - y); },
      [](double x, double y) { return x - y; }, "-");
}

ExtendedReal operator*(const ExtendedReal& a, const ExtendedReal& b) {
  return combine(
      a, b, [](const mpq_class& x, const mpq_class& y) { return mpq_class(x * y); },
      [](double x, double y) { return x * y; }, "*");
}

ExtendedReal operator/(const ExtendedReal& a, const ExtendedReal& b) {
  if (b.is_zero())
    throw PreconditionError("division by zero exponent");
  return combine(
      a, b, [](const mpq_class& x, const mpq_class& y) { return mpq_class(x / y); },
      [](double x, double y) { return x / y; }, "/");
}

ExtendedReal ExtendedReal::operator-() const { return ExtendedReal(0L) - *this; }

std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_infinite() || b.is_infinite()) {
    if (a.is_infinite() && b.is_infinite())
      return std::partial_ordering::equivalent;
    return a.is_infinite() ? std::partial_ordering::greater : std::partial_ordering::less;
  }
  if (a.is_exact() && b.is_exact()) {
    int c = cmp(a.exact(), b.exact());
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }
  return a.to_double() <=> b.to_double();
}

std::string to_string(GapClass c) {
  switch (c) {
  case GapClass::regular:
    return "regular";
  case GapClass::boundary:
    return "boundary";
  default:
    return "outside";
  }
}

ExponentProfile::ExponentProfile(ExtendedReal p, ExtendedReal q, int n, ExtendedReal r, ExtendedReal s)
    : m_p(std::move(p)), m_q(std::move(q)), m_n(n), m_r(std::move(r)), m_s(std::move(s)) {
  if (m_p.is_infinite() || m_p < ExtendedReal(2))
    throw PreconditionError("p must be a finite real >= 2");
  if (m_q.is_infinite() || m_q < m_p)
    throw PreconditionError("q must be finite with q >= p");
  if (m_n < 1)
    throw PreconditionError("n must be >= 1");
  if (m_r.is_finite() && m_r <= ExtendedReal(m_n))
    throw PreconditionError("r must exceed n (r = " + m_r.to_string() + ", n = " + std::to_string(m_n) +
                            ")");
  if (m_s < ExtendedReal(1))
    throw PreconditionError("s must be >= 1");
}

ExtendedReal ExponentProfile::sigma() const { return m_p / (ExtendedReal(1) + inv_s()); }

ExtendedReal ExponentProfile::gap_threshold() const {
  return (ExtendedReal(1) + inv_n() - inv_r()) / (ExtendedReal(1) + inv_s());
}

ExtendedReal ExponentProfile::gap_margin() const { return gap_threshold() - m_q / m_p; }

GapClass ExponentProfile::classify() const {
  ExtendedReal margin = gap_margin();
  if (margin.is_zero() || std::abs(margin.to_double()) <= kGapTolerance)
    return GapClass::boundary;
  return margin > ExtendedReal(0) ? GapClass::regular : GapClass::outside;
}

ExtendedReal ExponentProfile::two_star_s() const {
  // 2ns/(n(s+1)-2s) = 2n / (n + n/s - 2)
  ExtendedReal n(m_n);
  ExtendedReal denom = n + n * inv_s() - ExtendedReal(2);
  if (denom <= ExtendedReal(0))
    return ExtendedReal::infinity();
  return ExtendedReal(2) * n / denom;
}

ExtendedReal ExponentProfile::m() const {
  ExtendedReal denom = ExtendedReal(1) - ExtendedReal(2) * inv_r() - inv_s();
  if (denom <= ExtendedReal(0))
    return ExtendedReal::infinity();
  return denom.reciprocal();
}

bool ExponentProfile::m_finite() const { return m().is_finite(); }

bool ExponentProfile::trudinger_condition() const { return inv_r() + inv_s() < inv_n(); }

void ExponentProfile::require_regular(const char* what) const {
  if (classify() != GapClass::regular)
    throw PreconditionError(std::string(what) + ": gap condition q/p < (s/(s+1))(1+1/n-1/r) fails (margin " +
                            gap_margin().to_string() + ")");
  if (!trudinger_condition())
    throw PreconditionError(std::string(what) + ": requires s > nr/(r-n)");
}

ExtendedReal ExponentProfile::theta() const {
  require_regular("theta");
  // (ns(qr-pr+p)+qrn)/(rs(2q-p)) divided through by rs.
  ExtendedReal n(m_n);
  ExtendedReal num = n * (m_q - m_p) + n * m_p * inv_r() + n * m_q * inv_s();
  return num / (ExtendedReal(2) * m_q - m_p);
}

double ExponentProfile::interpolation_residual() const {
  const double th = theta().to_double();
  const double p = m_p.to_double(), q = m_q.to_double(), n = m_n;
  const double ir = inv_r().to_double(), is = inv_s().to_double();
  const double inv_tau = (1.0 - 2.0 * ir - is) / (2.0 * q - p);
  const double inv_tau1 = (n + n * is - 2.0) / (n * p);
  const double inv_tau2 = (1.0 + is) / p;
  const double a = th * inv_tau1, b = (1.0 - th) * inv_tau2;
  return std::abs(inv_tau - a - b) / (std::abs(inv_tau) + std::abs(a) + std::abs(b));
}

ExtendedReal ExponentProfile::young_ratio() const {
  // 2(q-p) / (p (1 - 2m/2*_s))
  // 1/2*_s = (n + n/s - 2)/(2n), taken literally: it is zero for n = 2,
  // s = inf and negative for n = 1, where the conjugate is unbounded.
  ExtendedReal n(m_n);
  ExtendedReal inv_ts = (n + n * inv_s() - ExtendedReal(2)) / (ExtendedReal(2) * n);
  ExtendedReal mm = m();
  if (mm.is_infinite()) {
    // Only reachable for n = 1, where 1/2*_s < 0 and the ratio tends to 0.
    if (inv_ts < ExtendedReal(0))
      return ExtendedReal(0);
    return ExtendedReal::infinity();
  }
  ExtendedReal frac = ExtendedReal(2) * mm * inv_ts;
  ExtendedReal denom = m_p * (ExtendedReal(1) - frac);
  if (denom <= ExtendedReal(0))
    return ExtendedReal::infinity();
  return ExtendedReal(2) * (m_q - m_p) / denom;
}

GapClass gap_classify(const ExtendedReal& p, const ExtendedReal& q, int n, const ExtendedReal& r,
                      const ExtendedReal& s) {
  return ExponentProfile(p, q, n, r, s).classify();
}

bool gap_implies_trudinger(int n, const ExtendedReal& r, const ExtendedReal& s) {
  if (n < 1)
    throw PreconditionError("n must be >= 1");
  return r.reciprocal() + s.reciprocal() < ExtendedReal::rational(1, n);
}

CounterexampleWindow counterexample_window(const ExtendedReal& alpha, const ExtendedReal& p,
                                           const ExtendedReal& r, const ExtendedReal& s) {
  if (!(alpha > ExtendedReal(0) && alpha < ExtendedReal(1)))
    throw PreconditionError("counterexample window needs alpha in (0,1)");
  if (!(p > ExtendedReal(1)))
    throw PreconditionError("counterexample window needs p > 1");
  CounterexampleWindow w;
  w.alpha_lower = ExtendedReal(1) - r.reciprocal();
  w.alpha_upper = s.reciprocal();
  w.a_inv_integrable = alpha < w.alpha_upper;
  w.k_integrable = alpha > w.alpha_lower;
  w.window_nonempty = r.reciprocal() + s.reciprocal() > ExtendedReal(1);
  return w;
}

MoserLadder moser_ladder(const ExtendedReal& p, int n, const ExtendedReal& r, const ExtendedReal& s,
                         std::size_t i_max) {
  ExponentProfile prof(p, p, n, r, s);
  ExtendedReal m = prof.m();
  if (m.is_infinite())
    throw LadderDivergenceError("Moser ladder: m is infinite (2/r + 1/s >= 1)");
  MoserLadder ladder;
  ExtendedReal ts = prof.two_star_s();
  if (ts.is_infinite()) {
    ladder.conjugate_unbounded = true;
    ladder.ratio = kUnboundedConjugateRatio;
  } else {
    ExtendedReal ratio = ts / (ExtendedReal(2) * m);
    if (ratio <= ExtendedReal(1))
      throw LadderDivergenceError("Moser ladder ratio 2*_s/(2m) = " + ratio.to_string() + " <= 1");
    ladder.ratio = ratio.to_double();
  }
  double p0 = (p * m).to_double();
  ladder.exponents.reserve(i_max + 1);
  double pi = p0;
  for (std::size_t i = 0; i <= i_max; ++i) {
    ladder.exponents.push_back(pi);
    pi *= ladder.ratio;
  }
  ladder.reciprocal_sum = ladder.ratio / (p0 * (ladder.ratio - 1.0));
  return ladder;
}

ExtendedReal theta_exponent(const ExtendedReal& p, const ExtendedReal& q, int n, const ExtendedReal& r,
                            const ExtendedReal& s) {
  return ExponentProfile(p, q, n, r, s).theta();
}

bool young_exponent_check(const ExtendedReal& p, const ExtendedReal& q, int n, const ExtendedReal& r,
                          const ExtendedReal& s) {
  return ExponentProfile(p, q, n, r, s).young_ratio() < ExtendedReal(1);
}

PowerWeightExponents power_weight_exponents(const ExtendedReal& alpha, int n) {
  if (!(alpha > ExtendedReal(0) && alpha < ExtendedReal(1)))
    throw PreconditionError("power weight exponents need alpha in (0,1)");
  if (n < 1)
    throw PreconditionError("n must be >= 1");
  ExtendedReal nn(n);
  return {nn / alpha, nn / (ExtendedReal(1) - alpha)};
}

ExtendedReal sobolev_conjugate(const ExtendedReal& sigma, int n) {
  ExtendedReal nn(n);
  if (sigma.is_infinite() || sigma >= nn)
    return ExtendedReal::infinity();
  return nn * sigma / (nn - sigma);
}

} // namespace pqlip
