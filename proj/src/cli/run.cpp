#include "pqlip/cli.hpp"

#include "pqlip/diagnostics.hpp"
#include "pqlip/errors.hpp"
#include "pqlip/field_io.hpp"
#include "pqlip/kernels.hpp"
#include "pqlip/oracle1d.hpp"
#include "pqlip/operators.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#ifndef PQLIP_VERSION
#define PQLIP_VERSION "unknown"
#endif

namespace pqlip {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

namespace {

/// Non-finite values become strings so the report stays valid JSON.
ojson num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ojson ext(const ExtendedReal& e) { return e.is_infinite() ? ojson("inf") : ojson(e.to_double()); }

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class ArtifactWriter {
public:
  explicit ArtifactWriter(fs::path dir) : m_dir(std::move(dir)) { fs::create_directories(m_dir); }

  void text(const std::string& name, const std::string& bytes) {
    std::ofstream os(m_dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (m_dir / name).string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error("write failed for " + (m_dir / name).string());
    m_files.push_back({{"path", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }

  void json(const std::string& name, const ojson& j) { text(name, j.dump(2) + "\n"); }

  void field(const std::string& stem, const DiscreteField& u) {
    // Binary only for large grids; CSV stays diffable otherwise.
    const bool binary = u.points() > (1u << 16);
    std::ostringstream os;
    if (binary)
      write_field_binary(os, u);
    else
      write_field_csv(os, u);
    text(stem + (binary ? ".bin" : ".csv"), os.str());
  }

  const ojson& files() const { return m_files; }
  const fs::path& dir() const { return m_dir; }

private:
  fs::path m_dir;
  ojson m_files = ojson::array();
};

ojson solve_report_json(const SolveReport& r) {
  return {{"method_requested", to_string(r.method_requested)},
          {"method_used", to_string(r.method_used)},
          {"fell_back", r.fell_back},
          {"fallback_reason", r.fallback_reason},
          {"iterations", r.iterations},
          {"energy", num(r.energy)},
          {"grad_norm", num(r.grad_norm)},
          {"rel_decrease", num(r.rel_decrease)}};
}

ojson estimate_json(const EstimateReport& r, std::size_t n_nodes) {
  ojson comps = ojson::object();
  for (const auto& c : r.rhs_components) comps[c.name] = num(c.value);
  return {{"id", to_string(r.id)},
          {"n_nodes", n_nodes},
          {"lhs", num(r.lhs)},
          {"rhs", num(r.rhs)},
          {"ratio", num(r.ratio)},
          {"rhs_components", comps},
          {"outer_radius", num(r.outer_radius)},
          {"inner_radius", num(r.inner_radius)},
          {"profile_class", r.profile_class}};
}

ojson profile_json(const ExponentProfile& prof) {
  return {{"p", ext(prof.p())}, {"q", ext(prof.q())}, {"n", prof.n()}, {"r", ext(prof.r())}, {"s", ext(prof.s())}};
}

std::string field_stem(std::size_t n) { return "field_n" + std::to_string(n); }

struct Context {
  const ExperimentConfig& cfg;
  ArtifactWriter& out;
  SolveOptions opts;
};

void run_exponents(Context& c) {
  const ExponentProfile& prof = *c.cfg.profile;
  const GapClass cls = prof.classify();
  ojson rep;
  rep["experiment"] = "exponents";
  rep["class"] = to_string(cls);
  rep["threshold"] = ext(prof.gap_threshold());
  rep["threshold_exact"] = prof.gap_threshold().to_string();
  rep["ratio"] = (prof.q() / prof.p()).to_double();
  rep["margin"] = ext(prof.gap_margin());
  rep["profile"] = profile_json(prof);
  rep["sigma"] = ext(prof.sigma());
  rep["two_star_s"] = ext(prof.two_star_s());
  rep["m"] = ext(prof.m());
  rep["trudinger"] = prof.trudinger_condition();
  if (cls == GapClass::regular) {
    rep["theta"] = ext(prof.theta());
    rep["interpolation_residual"] = num(prof.interpolation_residual());
    rep["young_ratio"] = ext(prof.young_ratio());
  } else {
    rep["theta"] = nullptr;
    rep["interpolation_residual"] = nullptr;
    rep["young_ratio"] = nullptr;
  }
  if (prof.m_finite()) {
    try {
      const MoserLadder ladder = moser_ladder(prof.p(), prof.n(), prof.r(), prof.s(), 0);
      rep["ladder_ratio"] = num(ladder.ratio);
      rep["ladder_conjugate_unbounded"] = ladder.conjugate_unbounded;
    } catch (const LadderDivergenceError&) {
      rep["ladder_ratio"] = nullptr;
    }
  } else {
    rep["ladder_ratio"] = nullptr;
  }
  c.out.json("report.json", rep);
}

void run_solve(Context& c) {
  ojson runs = ojson::array();
  for (std::size_t n : c.cfg.grids) {
    const Grid grid(c.cfg.dim, n);
    const SolveResult res = minimize(*c.cfg.density, grid, *c.cfg.boundary, c.opts);
    const DiscreteEnergy e(*c.cfg.density, grid, res.field.components());
    c.out.field(field_stem(n), res.field);
    runs.push_back({{"n_nodes", n},
                    {"solver", solve_report_json(res.report)},
                    {"max_gradient", num(e.max_cell_gradient(res.field))}});
  }
  c.out.json("report.json", {{"experiment", "solve"},
                             {"density", c.cfg.density->describe()},
                             {"dim", c.cfg.dim},
                             {"runs", runs}});
}

void run_oracle_compare(Context& c) {
  const OracleSpec& o = *c.cfg.oracle;
  const Oracle1DProblem prob(o.alpha, o.p, o.left, o.right);
  const ExactMinimizer exact(prob);
  const Density d = prob.density();
  ojson runs = ojson::array();
  std::string csv = "n_nodes,sup_error,energy,exact_energy,energy_rel_error,euler_spread\n";
  for (std::size_t n : c.cfg.grids) {
    const Grid grid(1, n);
    const SolveResult res = minimize(d, grid, prob.boundary(), c.opts);
    double sup_err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sup_err = std::max(sup_err, std::abs(res.field.at(0, i) - exact.u(grid.node_coord(i))));
    const double e_rel = std::abs(res.report.energy - exact.energy()) / exact.energy();
    const double spread = euler_invariant_spread(res.field, d);
    c.out.field(field_stem(n), res.field);
    runs.push_back({{"n_nodes", n},
                    {"sup_error", num(sup_err)},
                    {"energy", num(res.report.energy)},
                    {"exact_energy", num(exact.energy())},
                    {"energy_rel_error", num(e_rel)},
                    {"euler_spread", num(spread)},
                    {"solver", solve_report_json(res.report)}});
    csv += std::to_string(n) + "," + csv_num(sup_err) + "," + csv_num(res.report.energy) + "," +
           csv_num(exact.energy()) + "," + csv_num(e_rel) + "," + csv_num(spread) + "\n";
  }
  c.out.text("oracle.csv", csv);
  c.out.json("report.json", {{"experiment", "oracle-compare"},
                             {"alpha", o.alpha},
                             {"p", o.p},
                             {"left", o.left},
                             {"right", o.right},
                             {"blow_up_rate", num(blow_up_rate(o.alpha, o.p))},
                             {"runs", runs}});
}

void run_counterexample(Context& c) {
  const OracleSpec& o = *c.cfg.oracle;
  const Oracle1DProblem prob(o.alpha, o.p, o.left, o.right);
  const auto rows = refinement_study(prob, c.cfg.grids, c.opts);
  std::string csv = "n_nodes,max_gradient,predicted_factor,observed_factor\n";
  ojson jr = ojson::array();
  for (const auto& r : rows) {
    csv += std::to_string(r.n_nodes) + "," + csv_num(r.max_gradient) + "," + csv_num(r.predicted_factor) + "," +
           csv_num(r.observed_factor) + "\n";
    jr.push_back({{"n_nodes", r.n_nodes},
                  {"max_gradient", num(r.max_gradient)},
                  {"predicted_factor", num(r.predicted_factor)},
                  {"observed_factor", num(r.observed_factor)}});
  }
  c.out.text("refinement.csv", csv);
  c.out.json("report.json", {{"experiment", "counterexample"},
                             {"alpha", o.alpha},
                             {"p", o.p},
                             {"blow_up_rate", num(blow_up_rate(o.alpha, o.p))},
                             {"rows", jr}});
}

DiscreteField random_boundary_zero_field(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DiscreteField w(grid, 1);
  w.for_each([&](std::size_t i, std::size_t j, std::size_t l) {
    const double v = dist(rng);
    w.values()[l] = w.is_boundary(i, j) ? 0.0 : v;
  });
  return w;
}

void run_estimate_check(Context& c) {
  const EstimateSpec& es = c.cfg.estimate;
  const Density& d = *c.cfg.density;
  const ExponentProfile& prof = *c.cfg.profile;
  std::mt19937_64 rng(c.cfg.seed);
  std::string csv = "id,n_nodes,sample,lhs,rhs,ratio\n";
  ojson all = ojson::array();
  for (std::size_t n : c.cfg.grids) {
    const Grid grid(c.cfg.dim, n);
    const SolveResult res = minimize(d, grid, *c.cfg.boundary, c.opts);
    c.out.field(field_stem(n), res.field);
    for (EstimateId id : es.ids) {
      std::vector<EstimateReport> reps;
      switch (id) {
      case EstimateId::fin: reps.push_back(check_lipschitz_estimate(res.field, d, prof, es.R0, es.theta)); break;
      case EstimateId::hdfin:
        reps.push_back(check_second_derivative_estimate(res.field, d, prof, es.R0, es.theta));
        break;
      case EstimateId::hd6: reps.push_back(check_higher_diff_estimate(res.field, d, es.rho, es.R)); break;
      case EstimateId::sob:
        for (std::size_t k = 0; k < es.sobolev_samples; ++k)
          reps.push_back(weighted_sobolev_check(random_boundary_zero_field(grid, rng), d.a(), d.p(), prof.s()));
        break;
      default: throw PreconditionError("estimate " + to_string(id) + " is not available from estimate-check");
      }
      for (std::size_t k = 0; k < reps.size(); ++k) {
        std::string name = "estimate_" + to_string(id) + "_n" + std::to_string(n);
        if (id == EstimateId::sob) name += "_" + std::to_string(k);
        c.out.json(name + ".json", estimate_json(reps[k], n));
        csv += to_string(id) + "," + std::to_string(n) + "," + std::to_string(k) + "," + csv_num(reps[k].lhs) + "," +
               csv_num(reps[k].rhs) + "," + csv_num(reps[k].ratio) + "\n";
        all.push_back(name + ".json");
      }
    }
  }
  c.out.text("estimates.csv", csv);
  c.out.json("report.json", {{"experiment", "estimate-check"},
                             {"density", d.describe()},
                             {"profile", profile_json(prof)},
                             {"profile_class", to_string(prof.classify())},
                             {"estimates", all}});
}

void run_moser(Context& c) {
  const ExponentProfile& prof = *c.cfg.profile;
  std::string csv = "n_nodes,step,exponent,norm\n";
  ojson runs = ojson::array();
  for (std::size_t n : c.cfg.grids) {
    const Grid grid(c.cfg.dim, n);
    const SolveResult res = minimize(*c.cfg.density, grid, *c.cfg.boundary, c.opts);
    c.out.field(field_stem(n), res.field);
    const MoserReport m = moser_norm_ladder_check(res.field, prof, c.cfg.moser_steps);
    ojson exps = ojson::array(), norms = ojson::array();
    for (std::size_t i = 0; i < m.exponents.size(); ++i) {
      exps.push_back(num(m.exponents[i]));
      norms.push_back(num(m.norms[i]));
      csv += std::to_string(n) + "," + std::to_string(i) + "," + csv_num(m.exponents[i]) + "," + csv_num(m.norms[i]) +
             "\n";
    }
    runs.push_back({{"n_nodes", n},
                    {"exponents", exps},
                    {"norms", norms},
                    {"sup", num(m.sup)},
                    {"monotone", m.monotone},
                    {"violations", m.violations},
                    {"final_gap", num(m.final_gap)},
                    {"conjugate_unbounded", m.conjugate_unbounded},
                    {"finite", m.finite}});
  }
  c.out.text("ladder.csv", csv);
  c.out.json("report.json", {{"experiment", "moser"}, {"profile", profile_json(prof)}, {"runs", runs}});
}

void run_lavrentiev(Context& c) {
  const LavrentievReport r = lavrentiev_probe(*c.cfg.density, c.cfg.grids, *c.cfg.boundary, c.cfg.caps, c.opts);
  std::string csv = "n_nodes,cap,capped_energy,unrestricted_energy,relative_excess\n";
  ojson grids = ojson::array();
  for (std::size_t g = 0; g < r.grids.size(); ++g) {
    ojson capped = ojson::array();
    for (std::size_t k = 0; k < r.caps.size(); ++k) {
      capped.push_back(num(r.capped[g][k]));
      const double ex = (r.capped[g][k] - r.unrestricted[g]) / std::max(std::abs(r.unrestricted[g]), 1e-300);
      csv += std::to_string(r.grids[g]) + "," + csv_num(r.caps[k]) + "," + csv_num(r.capped[g][k]) + "," +
             csv_num(r.unrestricted[g]) + "," + csv_num(ex) + "\n";
    }
    grids.push_back({{"n_nodes", r.grids[g]},
                     {"unrestricted", num(r.unrestricted[g])},
                     {"capped", capped},
                     {"excess", num(r.excess[g])},
                     {"decreasing_in_cap", bool(r.decreasing_in_cap[g])}});
  }
  ojson caps = ojson::array();
  for (double cap : r.caps) caps.push_back(num(cap));
  c.out.text("lavrentiev.csv", csv);
  c.out.json("report.json", {{"experiment", "lavrentiev"},
                             {"density", c.cfg.density->describe()},
                             {"caps", caps},
                             {"tolerance", kLavrentievTolerance},
                             {"gap_flag", r.gap_flag},
                             {"grids", grids}});
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  if (dynamic_cast<const SingularPointError*>(&e)) return "SingularPointError";
  if (dynamic_cast<const DivergenceError*>(&e)) return "DivergenceError";
  if (dynamic_cast<const QuadratureSingularityError*>(&e)) return "QuadratureSingularityError";
  if (dynamic_cast<const DegeneratePairError*>(&e)) return "DegeneratePairError";
  if (dynamic_cast<const LadderDivergenceError*>(&e)) return "LadderDivergenceError";
  if (dynamic_cast<const InfeasibleError*>(&e)) return "InfeasibleError";
  if (dynamic_cast<const NonConvergenceError*>(&e)) return "NonConvergenceError";
  if (dynamic_cast<const IndexError*>(&e)) return "IndexError";
  return "Error";
}

bool is_assumption_violation(const std::exception& e) {
  return dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const DivergenceError*>(&e) ||
         dynamic_cast<const LadderDivergenceError*>(&e) || dynamic_cast<const InfeasibleError*>(&e) ||
         dynamic_cast<const QuadratureSingularityError*>(&e) || dynamic_cast<const SingularPointError*>(&e) ||
         dynamic_cast<const DomainError*>(&e);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read config " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int run_experiment(const RunOptions& ro, std::ostream& err) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  std::string text;
  try {
    text = read_file(ro.config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  std::optional<ExperimentConfig> cfg;
  int code = kExitOk;
  std::string status = "ok";
  std::optional<ojson> failure;
  try {
    cfg = parse_config(text, ro.experiment);
  } catch (const SchemaError& e) {
    err << "schema error in " << ro.config_path << ": " << e.what() << "\n";
    return kExitSchema;
  } catch (const Error& e) {
    code = is_assumption_violation(e) ? kExitAssumption : kExitError;
    status = code == kExitAssumption ? "assumption_violation" : "error";
    failure = ojson{{"experiment", to_string(ro.experiment)}, {"status", status}, {"error", error_kind(e)},
                    {"message", e.what()}};
  }
  const double t_parse = seconds_since(t0);

  const std::string out_dir = ro.out_dir ? *ro.out_dir : (cfg ? cfg->output : std::string("out"));
  std::optional<ArtifactWriter> writer;
  try {
    writer.emplace(out_dir);
  } catch (const std::exception& e) {
    err << "error: cannot create output directory " << out_dir << ": " << e.what() << "\n";
    return kExitError;
  }

  const auto t1 = clock::now();
  std::uint64_t seed = ro.seed ? *ro.seed : (cfg ? cfg->seed : 0);
  if (cfg) {
    cfg->seed = seed;
    Context ctx{*cfg, *writer, cfg->solver};
    if (ro.trace) {
      ctx.opts.trace = [&err](const IterationRecord& r) {
        ojson line = {{"iter", r.iter}, {"energy", num(r.energy)}, {"grad_norm", num(r.grad_norm)},
                      {"method", to_string(r.method)}};
        err << line.dump() << "\n";
      };
    }
    try {
      ctx.opts.validate();
      switch (*cfg->experiment) {
      case Experiment::exponents: run_exponents(ctx); break;
      case Experiment::solve: run_solve(ctx); break;
      case Experiment::oracle_compare: run_oracle_compare(ctx); break;
      case Experiment::estimate_check: run_estimate_check(ctx); break;
      case Experiment::moser: run_moser(ctx); break;
      case Experiment::lavrentiev: run_lavrentiev(ctx); break;
      case Experiment::counterexample: run_counterexample(ctx); break;
      }
    } catch (const Error& e) {
      code = is_assumption_violation(e) ? kExitAssumption : kExitError;
      status = code == kExitAssumption ? "assumption_violation" : "error";
      failure = ojson{{"experiment", to_string(*cfg->experiment)}, {"status", status}, {"error", error_kind(e)},
                      {"message", e.what()}};
    }
  }
  const double t_run = seconds_since(t1);

  try {
    if (failure) {
      err << status << ": " << (*failure)["error"].get<std::string>() << ": "
          << (*failure)["message"].get<std::string>() << "\n";
      writer->json("report.json", *failure);
    }
    ojson manifest = {{"tool", "pqlip"},
                      {"version", PQLIP_VERSION},
                      {"experiment", to_string(ro.experiment)},
                      {"config", {{"path", ro.config_path}, {"sha256", sha256_hex(text)}}},
                      {"seed", seed},
                      {"kernels", kernels::active().name},
                      {"status", status},
                      {"exit_code", code},
                      {"timings_seconds", {{"parse", t_parse}, {"run", t_run}, {"total", seconds_since(t0)}}},
                      {"files", writer->files()}};
    std::ofstream os(writer->dir() / "manifest.json", std::ios::binary);
    os << manifest.dump(2) << "\n";
    if (!os) throw Error("cannot write manifest");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return code;
}

} // namespace pqlip
