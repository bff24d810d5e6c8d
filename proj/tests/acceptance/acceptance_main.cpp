// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include "pqlip/cli.hpp"
#include "pqlip/diagnostics.hpp"
#include "pqlip/errors.hpp"
#include "pqlip/exponents.hpp"
#include "pqlip/operators.hpp"
#include "pqlip/oracle1d.hpp"
#include "pqlip/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace pqlip;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const ExtendedReal kInf = ExtendedReal::infinity();

ExtendedReal rat(long a, long b) { return ExtendedReal::rational(a, b); }

ExponentProfile random_profile(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<long> num(0, 4000);
  const ExtendedReal p = ExtendedReal(2) + rat(num(rng), 1000);
  const ExtendedReal q = p * (ExtendedReal(1) + rat(num(rng), 4000));
  const ExtendedReal r = num(rng) % 5 == 0 ? kInf : ExtendedReal(n) + rat(1 + num(rng) * 10, 1000);
  const ExtendedReal s = num(rng) % 5 == 0 ? kInf : ExtendedReal(1) + rat(num(rng) * 10, 1000);
  return ExponentProfile(p, q, n, r, s);
}

/// Uniform random node values, zero on the outer `band` layers of nodes.
DiscreteField random_field(const Grid& g, std::size_t comps, std::mt19937_64& rng, std::size_t band = 0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  DiscreteField u(g, comps);
  const std::size_t n = g.n_nodes();
  u.for_each([&](std::size_t i, std::size_t j, std::size_t) {
    bool in_band = i < band || i + band >= n;
    if (g.dim() == 2) in_band = in_band || j < band || j + band >= n;
    for (std::size_t c = 0; c < comps; ++c) u.at(c, i, j) = in_band ? 0.0 : U(rng);
  });
  return u;
}

// 1D oracle solve shared by the first two criteria.
struct OracleSolve {
  Oracle1DProblem prob{0.5, 2.0, 0.0, 1.0};
  Grid grid{1, 4097};
  std::optional<SolveResult> res;
  double seconds = 0.0;

  const SolveResult& get() {
    if (!res) {
      const auto t0 = clock_type::now();
      res = minimize(prob.density(), grid, prob.boundary());
      seconds = seconds_since(t0);
    }
    return *res;
  }
};

OracleSolve g_oracle;

Outcome oracle_equivalence() {
  const auto& res = g_oracle.get();
  const ExactMinimizer m(g_oracle.prob);
  double sup = 0.0;
  for (std::size_t i = 0; i < g_oracle.grid.n_nodes(); ++i)
    sup = std::max(sup, std::abs(res.field.at(0, i) - m.u(g_oracle.grid.node_coord(i))));
  const double erel = std::abs(res.report.energy - m.energy()) / m.energy();
  const bool ok = sup <= 1e-3 && erel <= 0.005 && g_oracle.seconds < 30.0;
  return {ok, fmt("sup_error=%.3e (<=1e-3) energy=%.10f exact=%.10f rel=%.3e (<=5e-3) time=%.2fs (<30s)", sup,
                  res.report.energy, m.energy(), erel, g_oracle.seconds)};
}

Outcome euler_invariant() {
  const double spread = euler_invariant_spread(g_oracle.get().field, g_oracle.prob.density());
  return {spread < 0.01, fmt("flux spread=%.3e (<1e-2)", spread)};
}

Outcome counterexample_blow_up() {
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const auto rows = refinement_study(prob, {129, 257, 513, 1025, 2049});
  bool ok = rows.size() == 5;
  std::string obs;
  for (std::size_t k = 2; k < rows.size(); ++k) {
    const double f = rows[k].observed_factor, target = std::sqrt(2.0);
    ok = ok && std::abs(f - target) <= 0.1 * target;
    obs += fmt("%s%.4f", obs.empty() ? "" : ",", f);
  }
  return {ok, "last three factors=" + obs + " target=1.4142 +-10%"};
}

Outcome gap_classifier() {
  const auto t0 = clock_type::now();
  std::size_t bad = 0, regular = 0;
  for (int n = 1; n <= 6; ++n) {
    if (ExponentProfile(2, 2, n, kInf, kInf).gap_threshold() != ExtendedReal(1) + rat(1, n)) ++bad;
    for (long r = n + 1; r <= 40; r += 3) {
      const ExtendedReal rr(r);
      if (ExponentProfile(2, 2, n, rr, kInf).gap_threshold() != ExtendedReal(1) + rat(1, n) - rr.reciprocal()) ++bad;
    }
  }
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10000; ++t) {
    const int n = 1 + t % 4;
    const ExponentProfile prof = random_profile(rng, n);
    if (prof.classify() != GapClass::regular) continue;
    ++regular;
    if (!(prof.r().reciprocal() + prof.s().reciprocal() < rat(1, n))) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 1.0,
          fmt("violations=%zu regular_profiles=%zu/10000 time=%.3fs (<1s)", bad, regular, secs)};
}

Outcome exponent_theorems() {
  std::mt19937_64 rng(5);
  std::size_t found = 0, bad = 0, draws = 0;
  while (found < 10000 && draws < 1000000) {
    ++draws;
    const int n = 2 + static_cast<int>(draws % 3);
    const ExponentProfile prof = random_profile(rng, n);
    if (prof.classify() != GapClass::regular) continue;
    // s > nr/(r-n) is equivalent to 1/r + 1/s < 1/n. The interpolation and
    // iteration exponents are those of dimension n >= 2.
    if (!(prof.r().reciprocal() + prof.s().reciprocal() < rat(1, n))) continue;
    ++found;
    const ExtendedReal th = prof.theta();
    bool ok = th > ExtendedReal(0) && th < ExtendedReal(1);
    ok = ok && th * (ExtendedReal(2) * prof.q() - prof.p()) / prof.p() < ExtendedReal(1);
    ok = ok && prof.interpolation_residual() < 1e-12;
    ok = ok && young_exponent_check(prof.p(), prof.q(), n, prof.r(), prof.s());
    ok = ok && moser_ladder(prof.p(), n, prof.r(), prof.s(), 1).ratio > 1.0;
    if (!ok) ++bad;
  }
  return {found == 10000 && bad == 0, fmt("profiles=%zu violations=%zu", found, bad)};
}

Outcome vp_bracket() {
  // Dense scan of magnitudes (log-spaced, plus 0), relative angles and p.
  std::vector<double> mags{0.0};
  for (int k = 0; k <= 60; ++k) mags.push_back(std::pow(10.0, -3.0 + 0.1 * k));
  double lo = 1.0, hi = 1.0;
  for (double p = 2.0; p <= 6.0 + 1e-12; p += 0.25)
    for (double a : mags)
      for (double b : mags)
        for (int k = 0; k <= 36; ++k) {
          const double ang = M_PI * k / 36.0;
          const std::vector<double> xi{a, 0.0}, eta{b * std::cos(ang), b * std::sin(ang)};
          if (std::hypot(xi[0] - eta[0], xi[1] - eta[1]) == 0.0) continue;
          const double r = vp_equivalence_ratio(xi, eta, p);
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
  const double c0 = std::max(hi, 1.0 / lo);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> P(2.0, 6.0), E(-3.0, 3.0), A(0.0, 2.0 * M_PI);
  std::size_t outside = 0;
  double rmin = 1.0, rmax = 1.0;
  for (int t = 0; t < 10000; ++t) {
    const double p = P(rng);
    const double a = std::pow(10.0, E(rng)), b = std::pow(10.0, E(rng)), t1 = A(rng), t2 = A(rng);
    const std::vector<double> xi{a * std::cos(t1), a * std::sin(t1)}, eta{b * std::cos(t2), b * std::sin(t2)};
    const double r = vp_equivalence_ratio(xi, eta, p);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
    if (r < 1.0 / c0 || r > c0) ++outside;
  }
  std::size_t p2_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::vector<double> xi{E(rng), E(rng)}, eta{E(rng), E(rng)};
    if (vp_equivalence_ratio(xi, eta, 2.0) != 1.0) ++p2_bad;
  }
  return {outside == 0 && p2_bad == 0,
          fmt("c0=%.6f sampled ratio in [%.6f, %.6f] outside=%zu p2_not_one=%zu", c0, rmin, rmax, outside, p2_bad)};
}

Outcome tau_identities() {
  std::mt19937_64 rng(7);
  double comm = 0.0, sbp = 0.0;
  for (int dim = 1; dim <= 2; ++dim) {
    const Grid g(dim, 15);
    for (int trial = 0; trial < 20; ++trial) {
      // Summation by parts needs both factors to vanish within |s| nodes of the boundary.
      const auto u = random_field(g, 2, rng);
      const auto f = random_field(g, 1, rng, 3), h = random_field(g, 1, rng, 3);
      for (int axis = 0; axis < dim; ++axis)
        for (long s : {1L, 2L, -3L}) {
          const auto a = lattice_gradient(tau_shift(u, axis, s));
          const auto b = tau_shift(discrete_gradient(u), axis, s);
          for (std::size_t i = 0; i < a.values().size(); ++i)
            comm = std::max(comm, std::abs(a.values()[i] - b.values()[i]));
          const auto th = tau_shift(h, axis, s);
          const auto tf = tau_shift(f, axis, -s);
          double lhs = 0.0, rhs = 0.0;
          th.for_each([&](std::size_t i, std::size_t j, std::size_t) { lhs += f.at(0, i, j) * th.at(0, i, j); });
          tf.for_each([&](std::size_t i, std::size_t j, std::size_t) { rhs += h.at(0, i, j) * tf.at(0, i, j); });
          sbp = std::max(sbp, std::abs(lhs - rhs));
        }
    }
  }
  std::size_t bad = 0;
  std::uniform_real_distribution<double> T(1.0, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + trial % 2;
    const Grid g(dim, 17);
    const auto u = random_field(g, 1, rng);
    const int axis = trial % dim;
    const long steps = 1 + trial % 3;
    const double t = T(rng), rho = 0.5, R = rho + steps * g.spacing();
    const double lhs = std::pow(norm_lt(tau_shift(u, axis, steps), t, Region{rho}), t);
    const double rhs =
        std::pow(steps * g.spacing(), t) * std::pow(norm_lt(partial_difference(u, axis), t, Region{R}), t);
    if (lhs > rhs * (1 + 1e-12)) ++bad;
  }
  return {comm <= 1e-12 && sbp <= 1e-12 && bad == 0,
          fmt("commutation_err=%.2e sbp_err=%.2e (<=1e-12) increment_violations=%zu/1000", comm, sbp, bad)};
}

Outcome moser_ladder_monotone() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1.0, 1.0), Al(0.2, 0.9);
  const ExponentProfile prof(2, rat(5, 2), 2, 20, 20);
  std::size_t violations = 0, nonfinite = 0, gap_bad = 0, checked = 0;
  double worst_gap = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto d = Density::double_phase(Coefficient::power_weight(Al(rng), {-1.5, U(rng)}), 2.0,
                                         Coefficient::constant(1.0, 2), 2.5);
    const double off = 0.5 * U(rng);
    const auto bc = BoundaryData::quadratic(0.0, {U(rng), U(rng)}, {U(rng), off, off, U(rng)}, 2);
    const auto res = minimize(d, Grid(2, 17), bc);
    const auto rep = moser_norm_ladder_check(res.field, prof, 4);
    violations += rep.violations;
    for (double v : rep.norms)
      if (!std::isfinite(v)) ++nonfinite;
    for (std::size_t i = 0; i < rep.exponents.size(); ++i) {
      if (rep.exponents[i] < 1e3) continue;
      ++checked;
      const double gap = (rep.sup - rep.norms[i]) / rep.sup;
      worst_gap = std::max(worst_gap, gap);
      if (gap > 0.02) ++gap_bad;
    }
  }
  return {violations == 0 && nonfinite == 0 && gap_bad == 0 && checked > 0,
          fmt("minimizers=100 monotonicity_violations=%zu nonfinite=%zu worst_gap(p_i>=1e3)=%.3e (<=2e-2)",
              violations, nonfinite, worst_gap)};
}

Outcome lipschitz_uniformity() {
  // Regular regime: the degenerate point of a sits on the domain boundary,
  // outside the closed square [-R0, R0]^2 over which K is taken.
  const double R0 = 0.8;
  std::vector<double> ratios;
  const auto bc = BoundaryData::quadratic(0.0, {1.0, 0.5}, {1.0, 0.2, 0.2, -0.5}, 2);
  for (double alpha : {0.3, 0.5, 0.7, 0.9})
    for (auto [p, q] : std::vector<std::pair<double, double>>{{2, 2.5}, {2, 2.9}, {2.5, 3}, {2.5, 3.6}, {3, 4}}) {
      const auto d = Density::double_phase(Coefficient::power_weight(alpha, {-1.0, 0.0}), p,
                                           Coefficient::constant(1.0, 2), q);
      const ExponentProfile prof(ExtendedReal::from_double(p), ExtendedReal::from_double(q), 2, kInf, kInf);
      if (prof.classify() != GapClass::regular) throw Error("family member outside the gap");
      const auto res = minimize(d, Grid(2, 33), bc);
      ratios.push_back(check_lipschitz_estimate(res.field, d, prof, R0).ratio);
    }
  const double mx = *std::max_element(ratios.begin(), ratios.end()), med = median(ratios);

  // Counterexample regime: p = q = 2, n = 1, r = s = 3/2 is outside the gap.
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const ExponentProfile cprof(2, 2, 1, rat(3, 2), rat(3, 2));
  std::vector<double> cr;
  for (std::size_t n : {129u, 257u, 513u, 1025u, 2049u}) {
    const auto res = minimize(prob.density(), Grid(1, n), prob.boundary());
    cr.push_back(check_lipschitz_estimate(res.field, prob.density(), cprof, 1.0).ratio);
  }
  double min_growth = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < cr.size(); ++k) min_growth = std::min(min_growth, cr[k] / cr[k - 1]);
  return {mx < 10.0 * med && min_growth > 1.2,
          fmt("regular family (20): max=%.4f median=%.4f max/median=%.3f (<10); counterexample min growth=%.4f "
              "(>1.2)",
              mx, med, mx / med, min_growth)};
}

Outcome weighted_sobolev() {
  const Grid g(2, 33);
  std::mt19937_64 rng(10);
  struct Family {
    const char* name;
    Coefficient lam;
    ExtendedReal s;
  };
  const std::vector<Family> fams{{"constant", Coefficient::constant(1.0, 2), kInf},
                                 {"off-centre", Coefficient::power_weight(0.5, {-1.5, 0.0}), kInf},
                                 {"interior-degenerate", Coefficient::power_weight(0.5, {0.0, 0.0}), ExtendedReal(2)}};
  std::string detail;
  bool ok = true;
  double worst_scale = 0.0;
  std::uniform_real_distribution<double> C(0.01, 100.0);
  for (const auto& f : fams) {
    std::vector<double> ratios;
    for (int k = 0; k < 100; ++k) {
      const auto w = random_field(g, 1, rng, 1);
      const auto rep = weighted_sobolev_check(w, f.lam, 2.0, f.s);
      ratios.push_back(rep.ratio);
      DiscreteField cw = w;
      const double c = C(rng);
      for (double& v : cw.values()) v *= c;
      const double r2 = weighted_sobolev_check(cw, f.lam, 2.0, f.s).ratio;
      worst_scale = std::max(worst_scale, std::abs(r2 - rep.ratio) / rep.ratio);
    }
    const double mx = *std::max_element(ratios.begin(), ratios.end());
    const bool fam_ok = std::isfinite(mx) && mx < 10.0 * median(ratios);
    ok = ok && fam_ok;
    detail += fmt("%s max=%.4f median=%.4f; ", f.name, mx, median(ratios));
  }
  ok = ok && worst_scale <= 1e-12;
  return {ok, detail + fmt("scaling rel err=%.2e (<=1e-12)", worst_scale)};
}

Outcome regularization_ladder() {
  const Oracle1DProblem prob(0.5, 2.0, 0.0, 1.0);
  const Grid g(1, 1025);
  LadderSchedule sched;
  sched.h_values = {10.0, 100.0, 1000.0};
  SolveOptions opts;
  const auto rungs = solve_ladder(prob.density(), g, prob.boundary(), sched, opts);
  const ExactMinimizer m(prob);
  bool ok = true;
  std::vector<double> errs;
  std::string fh;
  for (std::size_t k = 0; k < rungs.size(); ++k) {
    if (!rungs[k].ok) return {false, "rung failed: " + rungs[k].error};
    if (k > 0 && rungs[k].energy > rungs[k - 1].energy + 10 * opts.tol_energy) ok = false;
    double e = 0.0;
    for (std::size_t i = 0; i < g.n_nodes(); ++i) e = std::max(e, std::abs(rungs[k].field->at(0, i) - m.u(g.node_coord(i))));
    if (!errs.empty() && !(e < errs.back())) ok = false;
    errs.push_back(e);
    fh += fmt("%sF_h=%.8f", fh.empty() ? "" : ",", rungs[k].energy);
  }
  return {ok, fh + fmt(" sup errors=%.3e,%.3e,%.3e", errs[0], errs[1], errs[2])};
}

Outcome lavrentiev_no_gap() {
  const auto d = Density::double_phase(Coefficient::constant(1.0, 2), 2.0, Coefficient::constant(1.0, 2), 2.5);
  const auto bc = BoundaryData::quadratic(0.0, {0.5, 0.25}, {0.5, 0.0, 0.0, -0.25}, 2);
  const double L = bc.lipschitz();
  const std::vector<double> caps{4.0 * L, 8.0 * L, 16.0 * L};
  const auto rep = lavrentiev_probe(d, {17, 33}, bc, caps);
  double worst = 0.0;
  for (std::size_t gi = 0; gi < rep.grids.size(); ++gi)
    for (double c : rep.capped[gi]) worst = std::max(worst, std::abs(c - rep.unrestricted[gi]) / rep.unrestricted[gi]);
  return {worst <= kLavrentievTolerance && !rep.gap_flag,
          fmt("slope=%.4f caps>=4*slope on grids 17,33: worst rel excess=%.3e (<=5e-3)", L, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome cli_determinism() {
  const std::string cli = PQLIP_CLI_PATH, cfgdir = PQLIP_CONFIG_DIR;
  const std::vector<std::pair<std::string, std::string>> runs{{"solve", "solve_double_phase.json"},
                                                              {"estimate-check", "estimate_check.json"},
                                                              {"counterexample", "counterexample.json"},
                                                              {"moser", "moser.json"}};
  std::size_t compared = 0, differing = 0;
  for (const auto& [sub, cfg] : runs) {
    std::vector<fs::path> dirs;
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = fs::temp_directory_path() / ("pqlip_accept_" + sub + std::to_string(k));
      fs::remove_all(dir);
      const std::string cmd = cli + " " + sub + " --config " + cfgdir + "/" + cfg + " --seed 42 --out " +
                              dir.string() + " > /dev/null 2>&1";
      const int st = std::system(cmd.c_str());
      if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) return {false, sub + " exited abnormally"};
      dirs.push_back(dir);
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      if (e.path().filename() == "manifest.json") continue;
      ++compared;
      if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) ++differing;
    }
  }
  return {compared > 0 && differing == 0, fmt("files compared=%zu differing=%zu", compared, differing)};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle_equivalence", oracle_equivalence},
      {"euler_invariant", euler_invariant},
      {"counterexample_blow_up", counterexample_blow_up},
      {"gap_classifier_exactness", gap_classifier},
      {"exponent_theorems", exponent_theorems},
      {"vp_bracket", vp_bracket},
      {"tau_identities", tau_identities},
      {"moser_ladder", moser_ladder_monotone},
      {"lipschitz_uniformity", lipschitz_uniformity},
      {"weighted_sobolev", weighted_sobolev},
      {"regularization_ladder", regularization_ladder},
      {"lavrentiev_no_gap", lavrentiev_no_gap},
      {"cli_determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = clock_type::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (k + 1) << " " << criteria[k].first << ": " << o.detail
              << fmt(" [%.2fs]", seconds_since(t0)) << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
