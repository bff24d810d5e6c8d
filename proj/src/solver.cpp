#include "pqlip/solver.hpp"

#include "pqlip/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace pqlip {

// ---------------------------------------------------------------- boundary

BoundaryData BoundaryData::affine(std::vector<double> c0, std::vector<double> gradient, int dim) {
  if (dim != 1 && dim != 2) throw PreconditionError("boundary data dimension must be 1 or 2");
  if (c0.empty() || gradient.size() != c0.size() * static_cast<std::size_t>(dim))
    throw PreconditionError("affine boundary data needs N offsets and an N x dim gradient");
  for (double v : c0)
    if (!std::isfinite(v)) throw PreconditionError("boundary data must be finite");
  for (double v : gradient)
    if (!std::isfinite(v)) throw PreconditionError("boundary data must be finite");
  BoundaryData b;
  b.m_kind = Kind::affine;
  b.m_dim = dim;
  b.m_c0 = std::move(c0);
  b.m_g = std::move(gradient);
  return b;
}

BoundaryData BoundaryData::endpoints(double a, double b) { return affine({0.5 * (a + b)}, {0.5 * (b - a)}, 1); }

BoundaryData BoundaryData::constant(double value, int dim, std::size_t components) {
  return affine(std::vector<double>(components, value), std::vector<double>(components * dim, 0.0), dim);
}

BoundaryData BoundaryData::quadratic(double c0, std::vector<double> gradient, std::vector<double> hessian, int dim) {
  if (dim != 1 && dim != 2) throw PreconditionError("boundary data dimension must be 1 or 2");
  if (gradient.size() != static_cast<std::size_t>(dim) || hessian.size() != static_cast<std::size_t>(dim * dim))
    throw PreconditionError("quadratic boundary data needs a dim-vector and a dim x dim matrix");
  if (dim == 2 && hessian[1] != hessian[2]) throw PreconditionError("quadratic boundary Hessian must be symmetric");
  BoundaryData b;
  b.m_kind = Kind::quadratic;
  b.m_dim = dim;
  b.m_c0 = {c0};
  b.m_g = std::move(gradient);
  b.m_h = std::move(hessian);
  for (double v : b.m_g)
    if (!std::isfinite(v)) throw PreconditionError("boundary data must be finite");
  for (double v : b.m_h)
    if (!std::isfinite(v)) throw PreconditionError("boundary data must be finite");
  return b;
}

double BoundaryData::value(std::size_t component, std::span<const double> x) const {
  double v = m_c0.at(component);
  for (int a = 0; a < m_dim; ++a) v += m_g[component * m_dim + a] * x[a];
  if (m_kind == Kind::quadratic)
    for (int a = 0; a < m_dim; ++a)
      for (int b = 0; b < m_dim; ++b) v += 0.5 * m_h[a * m_dim + b] * x[a] * x[b];
  return v;
}

double BoundaryData::lipschitz() const {
  if (m_kind == Kind::affine) {
    double acc = 0.0;
    for (double v : m_g) acc += v * v;
    return std::sqrt(acc);
  }
  // |g + Hx| is convex in x, so its maximum over the square is at a corner.
  double best = 0.0;
  for (int mask = 0; mask < (1 << m_dim); ++mask) {
    double acc = 0.0;
    for (int a = 0; a < m_dim; ++a) {
      double da = m_g[a];
      for (int b = 0; b < m_dim; ++b) da += m_h[a * m_dim + b] * ((mask >> b) & 1 ? 1.0 : -1.0);
      acc += da * da;
    }
    best = std::max(best, acc);
  }
  return std::sqrt(best);
}

DiscreteField BoundaryData::sample(const Grid& grid) const {
  if (grid.dim() != m_dim) throw PreconditionError("boundary data and grid have different dimensions");
  DiscreteField u(grid, components());
  for (std::size_t c = 0; c < components(); ++c) {
    u.for_each([&](std::size_t i, std::size_t j, std::size_t) {
      const auto pt = u.point(i, j);
      u.at(c, i, j) = value(c, std::span<const double>(pt.data(), m_dim));
    });
  }
  return u;
}

// ---------------------------------------------------------------- options

std::string to_string(SolveMethod m) {
  return m == SolveMethod::newton_trust ? "newton_trust" : "gradient_backtracking";
}

void SolveOptions::validate() const {
  if (!(tol_grad > 0.0) || !(tol_energy > 0.0)) throw PreconditionError("solver tolerances must be positive");
  if (max_iter < 1) throw PreconditionError("max_iter must be at least 1");
}

double LadderSchedule::sigma() const {
  if (s.is_infinite()) return p;
  return (ExtendedReal::from_double(p) * s / (s + ExtendedReal(1))).to_double();
}

void LadderSchedule::validate() const {
  if (h_values.empty()) throw PreconditionError("ladder schedule is empty");
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    if (!(h_values[i] > 0.0) || !std::isfinite(h_values[i])) throw PreconditionError("ladder h values must be finite and positive");
    if (i > 0 && !(h_values[i] > h_values[i - 1])) throw PreconditionError("ladder h values must be strictly increasing");
  }
  if (!(p >= 2.0)) throw PreconditionError("ladder exponent p must be >= 2");
  if (s.is_finite() && s < ExtendedReal(1)) throw PreconditionError("ladder exponent s must be >= 1");
  if (sigma() < 2.0 - 1e-15)
    throw PreconditionError("regularizing exponent ps/(s+1) = " + std::to_string(sigma()) + " is below 2");
}

// ---------------------------------------------------------------- solvers

namespace {

struct DegenerateHessian {
  std::string why;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

/// Round-off level of an energy value: differences below this are noise.
double noise_level(double energy) { return 1e-13 * std::max(1.0, std::abs(energy)); }

class Runner {
public:
  Runner(const DiscreteEnergy& e, DiscreteField& u, const SolveOptions& opts, SolveReport& rep)
      : m_e(e), m_u(u), m_opts(opts), m_rep(rep), m_g(e.grid(), e.components()) {}

  void newton();
  void gradient();

private:
  bool converged() const { return m_gn <= m_opts.tol_grad && m_rel <= m_opts.tol_energy; }
  void trace(SolveMethod m) {
    if (m_opts.trace) m_opts.trace({m_rep.iterations, m_E, m_gn, m});
  }
  void start() {
    m_E = m_e.value_and_gradient(m_u, m_g);
    if (!std::isfinite(m_E)) throw PreconditionError("starting field has infinite energy");
    m_gn = max_abs(m_g.values());
  }
  void finish() {
    m_rep.energy = m_E;
    m_rep.grad_norm = m_gn;
    m_rep.rel_decrease = m_rel;
  }
  [[noreturn]] void fail(const std::string& why) {
    finish();
    throw NonConvergenceError(why, m_u, m_gn, m_rep);
  }
  void newton_direction(const DiscreteEnergy::Curvature& c, std::vector<double>& d);

  const DiscreteEnergy& m_e;
  DiscreteField& m_u;
  const SolveOptions& m_opts;
  SolveReport& m_rep;
  DiscreteField m_g;
  double m_E = 0.0;
  double m_gn = 0.0;
  double m_rel = 0.0;
};

void Runner::newton_direction(const DiscreteEnergy::Curvature& c, std::vector<double>& d) {
  const auto& mask = m_u.boundary_mask();
  const std::size_t P = m_u.points();
  const std::size_t N = m_u.components();
  d.assign(m_u.values().size(), 0.0);

  if (m_e.grid().dim() == 1 && N == 1) {
    std::vector<double> diag, off;
    m_e.hessian_tridiagonal(c, diag, off);
    const std::size_t m = diag.size();
    std::vector<double> cp(m), dp(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double rhs = -m_g.values()[k + 1];
      const double sub = k > 0 ? off[k - 1] : 0.0;
      const double denom = diag[k] - (k > 0 ? sub * cp[k - 1] : 0.0);
      if (!(denom > 0.0) || !std::isfinite(denom)) throw DegenerateHessian{"tridiagonal Hessian is not positive definite"};
      cp[k] = k + 1 < m ? off[k] / denom : 0.0;
      dp[k] = (rhs - (k > 0 ? sub * dp[k - 1] : 0.0)) / denom;
    }
    for (std::size_t k = m; k-- > 0;) {
      d[k + 1] = dp[k] - (k + 1 < m ? cp[k] * d[k + 2] : 0.0);
    }
    return;
  }

  DiscreteField diag(m_e.grid(), N);
  m_e.hessian_diagonal(c, diag);
  for (std::size_t comp = 0; comp < N; ++comp)
    for (std::size_t l = 0; l < P; ++l)
      if (!mask[l] && !(diag.values()[comp * P + l] > 0.0))
        throw DegenerateHessian{"Hessian diagonal vanishes at an interior node"};

  std::vector<double> r(d.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -m_g.values()[i];
  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double dv = diag.values()[i];
      out[i] = dv > 0.0 ? in[i] / dv : 0.0;
    }
  };
  std::vector<double> z, p;
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  const double rnorm0 = std::sqrt(dot(r, r));
  const double eta = std::min(0.1, std::sqrt(rnorm0));
  const std::size_t max_cg = std::min<std::size_t>(5000, m_u.interior_count() * N + 50);
  DiscreteField pf(m_e.grid(), N), hp(m_e.grid(), N);
  for (std::size_t k = 0; k < max_cg; ++k) {
    pf.values() = p;
    m_e.apply_hessian(c, pf, hp);
    const double php = dot(p, hp.values());
    if (!(php > 0.0) || !std::isfinite(php)) {
      if (k == 0) throw DegenerateHessian{"Hessian has a nonpositive direction"};
      break;
    }
    const double alpha = rz / php;
    axpy(alpha, p, d);
    axpy(-alpha, hp.values(), r);
    if (std::sqrt(dot(r, r)) <= eta * rnorm0) break;
    precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
}

void Runner::newton() {
  start();
  const double scale = std::max(1.0, max_abs(m_u.values()));
  double radius = scale;
  DiscreteField trial = m_u;
  DiscreteField gt(m_e.grid(), m_e.components());
  DiscreteField df(m_e.grid(), m_e.components()), hd(m_e.grid(), m_e.components());
  std::vector<double> d;
  for (;; ++m_rep.iterations) {
    trace(SolveMethod::newton_trust);
    if (converged()) break;
    if (m_rep.iterations >= m_opts.max_iter) fail("newton_trust: iteration limit reached");

    const auto curv = m_e.curvature(m_u);
    newton_direction(curv, d);
    double dn = max_abs(d);
    if (!std::isfinite(dn)) throw DegenerateHessian{"Newton direction is not finite"};
    bool clipped = false;
    if (dn > radius) {
      for (double& v : d) v *= radius / dn;
      dn = radius;
      clipped = true;
    }
    df.values() = d;
    m_e.apply_hessian(curv, df, hd);
    const double pred = -(dot(m_g.values(), d) + 0.5 * dot(d, hd.values()));
    const double noise = noise_level(m_E);
    if (pred <= noise) m_rel = 0.0; // model sees no decrease beyond round-off

    for (std::size_t i = 0; i < d.size(); ++i) trial.values()[i] = m_u.values()[i] + d[i];
    const double Et = m_e.value_and_gradient(trial, gt);
    const double actual = m_E - Et;
    bool accept = false;
    double rho = 0.0;
    if (std::isfinite(Et)) {
      if (pred <= noise) {
        accept = max_abs(gt.values()) < m_gn && actual >= -noise;
      } else {
        rho = actual / pred;
        accept = rho > 1e-4;
      }
    }
    if (accept) {
      m_rel = actual <= noise ? 0.0 : actual / std::max(std::abs(m_E), std::numeric_limits<double>::min());
      std::swap(m_u.values(), trial.values());
      std::swap(m_g.values(), gt.values());
      m_E = Et;
      m_gn = max_abs(m_g.values());
      if (rho > 0.75 && clipped) radius *= 2.0;
    } else {
      if (pred <= noise && m_gn <= m_opts.tol_grad) continue; // stationary to round-off
      radius = 0.25 * std::min(radius, dn);
      if (radius < 1e-14 * scale) throw DegenerateHessian{"trust region collapsed"};
    }
  }
  finish();
}

void Runner::gradient() {
  start();
  const double scale = std::max(1.0, max_abs(m_u.values()));
  DiscreteField trial = m_u;
  DiscreteField gt(m_e.grid(), m_e.components());
  double alpha = m_gn > 0.0 ? 0.1 * scale / m_gn : 1.0;
  for (;; ++m_rep.iterations) {
    trace(SolveMethod::gradient_backtracking);
    if (converged()) break;
    if (m_rep.iterations >= m_opts.max_iter) fail("gradient_backtracking: iteration limit reached");

    const double g2 = dot(m_g.values(), m_g.values());
    const double noise = noise_level(m_E);
    bool accepted = false;
    double step = alpha;
    for (int halving = 0; halving < 80; ++halving, step *= 0.5) {
      for (std::size_t i = 0; i < trial.values().size(); ++i)
        trial.values()[i] = m_u.values()[i] - step * m_g.values()[i];
      const double Et = m_e.value_and_gradient(trial, gt);
      if (!std::isfinite(Et)) continue;
      if (Et <= m_E - 1e-4 * step * g2 || (step * g2 <= noise && Et <= m_E + noise)) {
        const double actual = m_E - Et;
        m_rel = actual <= noise ? 0.0 : actual / std::max(std::abs(m_E), std::numeric_limits<double>::min());
        // Barzilai-Borwein scaling for the next initial step.
        double sy = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < gt.values().size(); ++i) {
          const double s = -step * m_g.values()[i];
          const double y = gt.values()[i] - m_g.values()[i];
          sy += s * y;
          ss += s * s;
        }
        alpha = sy > 0.0 ? ss / sy : 2.0 * step;
        std::swap(m_u.values(), trial.values());
        std::swap(m_g.values(), gt.values());
        m_E = Et;
        m_gn = max_abs(m_g.values());
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (m_gn <= m_opts.tol_grad) {
        m_rel = 0.0; // no measurable decrease is available
        continue;
      }
      fail("gradient_backtracking: line search failed");
    }
  }
  finish();
}

DiscreteField with_boundary(const DiscreteField& seed, const DiscreteField& bc_field) {
  if (!(seed.grid() == bc_field.grid()) || seed.components() != bc_field.components() || !seed.is_full())
    throw PreconditionError("seed field does not match the grid and boundary data");
  DiscreteField u = seed;
  const auto& mask = u.boundary_mask();
  const std::size_t P = u.points();
  for (std::size_t c = 0; c < u.components(); ++c)
    for (std::size_t l = 0; l < P; ++l)
      if (mask[l]) u.values()[c * P + l] = bc_field.values()[c * P + l];
  u.clear_certificate();
  return u;
}

} // namespace

SolveResult minimize_energy(const DiscreteEnergy& e, DiscreteField u, const SolveOptions& opts) {
  opts.validate();
  if (!u.all_finite()) throw PreconditionError("starting field has non-finite values");
  SolveReport rep;
  rep.method_requested = opts.method;
  rep.method_used = opts.method;
  Runner runner(e, u, opts, rep);
  if (opts.method == SolveMethod::gradient_backtracking) {
    runner.gradient();
  } else {
    try {
      runner.newton();
    } catch (const DegenerateHessian& dh) {
      rep.fell_back = true;
      rep.fallback_reason = dh.why;
      rep.method_used = SolveMethod::gradient_backtracking;
      Runner fallback(e, u, opts, rep);
      fallback.gradient();
    }
  }
  u.set_certificate({"solver", rep.grad_norm, rep.energy});
  return {std::move(u), rep};
}

SolveResult minimize(const Density& d, const Grid& grid, const BoundaryData& bc, const SolveOptions& opts) {
  if (bc.dim() != grid.dim() || d.dim() != grid.dim())
    throw PreconditionError("density, grid and boundary data must share the dimension");
  const DiscreteEnergy e(d, grid, bc.components(), opts.kernels ? *opts.kernels : kernels::active());
  DiscreteField bc_field = bc.sample(grid);
  DiscreteField start = opts.seed ? with_boundary(*opts.seed, bc_field) : std::move(bc_field);
  return minimize_energy(e, std::move(start), opts);
}

std::vector<LadderRung> solve_ladder(const Density& d, const Grid& grid, const BoundaryData& bc,
                                     const LadderSchedule& schedule, const SolveOptions& opts) {
  schedule.validate();
  const kernels::KernelSet& ks = opts.kernels ? *opts.kernels : kernels::active();
  const DiscreteEnergy base(d, grid, bc.components(), ks);
  const DiscreteField candidate = bc.sample(grid);
  std::vector<LadderRung> rungs;
  std::optional<DiscreteField> previous;
  for (double h : schedule.h_values) {
    LadderRung rung;
    rung.h = h;
    const Density fh = Density::regularized(d, h, schedule.p, schedule.s);
    const DiscreteEnergy eh(fh, grid, bc.components(), ks);
    rung.candidate_energy = eh.value(candidate);
    SolveOptions o = opts;
    o.seed = previous;
    rung.warm_started = previous.has_value();
    std::optional<SolveResult> res;
    try {
      res = minimize(fh, grid, bc, o);
    } catch (const Error& first) {
      rung.reseeded = true;
      o.seed.reset();
      try {
        res = minimize(fh, grid, bc, o);
      } catch (const Error& second) {
        rung.error = second.what();
      }
    }
    if (!res) {
      previous.reset();
      rungs.push_back(std::move(rung));
      continue;
    }
    rung.ok = true;
    rung.report = res->report;
    rung.energy = res->report.energy;
    rung.base_energy = base.value(res->field);
    rung.comparison_ok = rung.energy <= rung.candidate_energy + noise_level(rung.candidate_energy);
    previous = res->field;
    rung.field = std::move(res->field);
    rungs.push_back(std::move(rung));
  }
  return rungs;
}

CappedResult minimize_capped(const Density& d, const Grid& grid, const BoundaryData& bc, double cap,
                             const SolveOptions& opts) {
  const double lip = bc.lipschitz();
  if (!(cap > lip * (1.0 + 1e-12)))
    throw InfeasibleError("gradient cap " + std::to_string(cap) + " does not exceed the boundary Lipschitz constant " +
                          std::to_string(lip));
  const kernels::KernelSet& ks = opts.kernels ? *opts.kernels : kernels::active();
  const DiscreteEnergy plain(d, grid, bc.components(), ks);
  DiscreteEnergy barrier(d, grid, bc.components(), ks);
  DiscreteField u = bc.sample(grid);
  const double domain = grid.dim() == 1 ? 2.0 : 4.0;
  double mu = 1e-2 * std::max(1e-3, plain.value(u) / domain);
  const double mu_min = 1e-9 * mu;
  CappedResult out{u, 0.0, 0.0, 0};
  SolveOptions o = opts;
  o.seed.reset();
  double residual = 0.0;
  for (;;) {
    barrier.set_barrier(cap, mu);
    try {
      SolveResult r = minimize_energy(barrier, u, o);
      u = std::move(r.field);
      residual = r.report.grad_norm;
    } catch (const NonConvergenceError&) {
      // Once the slack of active cells nears round-off the subproblem
      // gradient cannot reach tol_grad; keep the last converged point.
      if (out.barrier_steps == 0) throw;
      break;
    }
    out.final_mu = mu;
    ++out.barrier_steps;
    if (mu <= mu_min) break;
    mu = std::max(mu_min, mu * 0.1);
  }
  out.energy = plain.value(u);
  out.max_gradient = plain.max_cell_gradient(u);
  u.set_certificate({"solver", residual, out.energy});
  out.field = std::move(u);
  return out;
}

} // namespace pqlip
