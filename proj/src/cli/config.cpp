#include "pqlip/config.hpp"

#include "pqlip/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <initializer_list>
#include <limits>

namespace pqlip {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError("field " + (path.empty() ? std::string("/") : path) + ": " + what);
}

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) fail(child(path, it.key()), "unknown field");
}

const json* find(const json& j, std::string_view key) {
  auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const std::string& path, std::string_view key) {
  const json* v = find(j, key);
  if (!v) fail(child(path, key), "required field missing");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double number(const json& j, const std::string& path, std::string_view key) {
  return as_number(require(j, path, key), child(path, key));
}

double number_or(const json& j, const std::string& path, std::string_view key, double fallback) {
  const json* v = find(j, key);
  return v ? as_number(*v, child(path, key)) : fallback;
}

std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "/" + std::to_string(i)));
  return out;
}

/// Number, or a string such as "inf", "3/2", "2.5".
ExtendedReal as_exponent(const json& v, const std::string& path) {
  if (v.is_number_integer()) return ExtendedReal(static_cast<long>(v.get<long long>()));
  if (v.is_number()) return ExtendedReal::from_double(v.get<double>());
  if (v.is_string()) {
    try {
      return ExtendedReal::parse(v.get<std::string>());
    } catch (const Error& e) {
      fail(path, std::string("not an exponent: ") + e.what());
    }
  }
  fail(path, "expected a number or a string such as \"inf\"");
}

Coefficient parse_coefficient(const json& v, const std::string& path, int dim) {
  if (v.is_number()) return Coefficient::constant(v.get<double>(), dim);
  require_object(v, path);
  const std::string kind = as_string(require(v, path, "kind"), child(path, "kind"));
  if (kind == "constant") {
    allow_keys(v, path, {"kind", "value"});
    return Coefficient::constant(number(v, path, "value"), dim);
  }
  if (kind == "power_weight") {
    allow_keys(v, path, {"kind", "alpha", "center"});
    std::vector<double> center(dim, 0.0);
    if (const json* c = find(v, "center")) {
      center = as_numbers(*c, child(path, "center"));
      if (center.size() != static_cast<std::size_t>(dim)) fail(child(path, "center"), "must have one entry per axis");
    }
    return Coefficient::power_weight(number(v, path, "alpha"), center);
  }
  if (kind == "tabulated") {
    allow_keys(v, path, {"kind", "n_nodes", "values"});
    const std::size_t n = as_count(require(v, path, "n_nodes"), child(path, "n_nodes"));
    if (n < 2) fail(child(path, "n_nodes"), "must be at least 2");
    auto values = as_numbers(require(v, path, "values"), child(path, "values"));
    const Grid g(dim, n);
    if (values.size() != g.node_count()) fail(child(path, "values"), "must hold one value per node");
    return Coefficient::tabulated(g, std::move(values));
  }
  fail(child(path, "kind"), "expected one of constant, power_weight, tabulated");
}

Density parse_density(const json& v, const std::string& path, int dim) {
  require_object(v, path);
  allow_keys(v, path, {"family", "p", "q", "alpha", "center", "coefficients"});
  const std::string family = as_string(require(v, path, "family"), child(path, "family"));
  const double p = number(v, path, "p");
  const json* coeffs = find(v, "coefficients");
  if (coeffs) {
    require_object(*coeffs, child(path, "coefficients"));
    allow_keys(*coeffs, child(path, "coefficients"), {"a", "b"});
  }
  const std::string cpath = child(path, "coefficients");

  auto default_a = [&]() {
    const double alpha = number_or(v, path, "alpha", 0.0);
    if (alpha == 0.0) return Coefficient::constant(1.0, dim);
    std::vector<double> center(dim, 0.0);
    if (const json* c = find(v, "center")) {
      center = as_numbers(*c, child(path, "center"));
      if (center.size() != static_cast<std::size_t>(dim)) fail(child(path, "center"), "must have one entry per axis");
    }
    return Coefficient::power_weight(alpha, center);
  };
  const json* ja = coeffs ? find(*coeffs, "a") : nullptr;
  const json* jb = coeffs ? find(*coeffs, "b") : nullptr;
  Coefficient a = ja ? parse_coefficient(*ja, child(cpath, "a"), dim) : default_a();

  if (family == "power_weight") {
    if (jb) fail(child(cpath, "b"), "only the double_phase family takes b");
    return Density::power_weight(a, p);
  }
  if (family == "pure_power") {
    if (jb) fail(child(cpath, "b"), "only the double_phase family takes b");
    return Density::pure_power(a, p);
  }
  if (family == "double_phase") {
    const double q = number(v, path, "q");
    Coefficient b = jb ? parse_coefficient(*jb, child(cpath, "b"), dim) : Coefficient::constant(1.0, dim);
    return Density::double_phase(a, p, b, q);
  }
  fail(child(path, "family"), "expected one of power_weight, double_phase, pure_power");
}

ExponentProfile parse_profile(const json& v, const std::string& path) {
  require_object(v, path);
  allow_keys(v, path, {"p", "q", "n", "r", "s"});
  const auto p = as_exponent(require(v, path, "p"), child(path, "p"));
  const auto q = as_exponent(require(v, path, "q"), child(path, "q"));
  const json& jn = require(v, path, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 1) fail(child(path, "n"), "expected a positive integer");
  const auto r = as_exponent(require(v, path, "r"), child(path, "r"));
  const auto s = as_exponent(require(v, path, "s"), child(path, "s"));
  return ExponentProfile(p, q, jn.get<int>(), r, s);
}

BoundaryData parse_boundary(const json& v, const std::string& path, int dim) {
  require_object(v, path);
  const std::string kind = as_string(require(v, path, "kind"), child(path, "kind"));
  if (kind == "endpoints") {
    allow_keys(v, path, {"kind", "left", "right"});
    if (dim != 1) fail(child(path, "kind"), "endpoints data needs a 1D grid");
    return BoundaryData::endpoints(number(v, path, "left"), number(v, path, "right"));
  }
  if (kind == "constant") {
    allow_keys(v, path, {"kind", "value", "components"});
    std::size_t comps = 1;
    if (const json* c = find(v, "components")) comps = as_count(*c, child(path, "components"));
    return BoundaryData::constant(number(v, path, "value"), dim, comps);
  }
  if (kind == "affine") {
    allow_keys(v, path, {"kind", "c0", "gradient"});
    return BoundaryData::affine(as_numbers(require(v, path, "c0"), child(path, "c0")),
                                as_numbers(require(v, path, "gradient"), child(path, "gradient")), dim);
  }
  if (kind == "quadratic") {
    allow_keys(v, path, {"kind", "c0", "gradient", "hessian"});
    return BoundaryData::quadratic(number(v, path, "c0"),
                                   as_numbers(require(v, path, "gradient"), child(path, "gradient")),
                                   as_numbers(require(v, path, "hessian"), child(path, "hessian")), dim);
  }
  fail(child(path, "kind"), "expected one of endpoints, constant, affine, quadratic");
}

void parse_solver(const json& v, const std::string& path, SolveOptions& opts) {
  require_object(v, path);
  allow_keys(v, path, {"method", "tol_grad", "tol_energy", "max_iter"});
  if (const json* m = find(v, "method")) {
    const std::string name = as_string(*m, child(path, "method"));
    if (name == "newton_trust")
      opts.method = SolveMethod::newton_trust;
    else if (name == "gradient_backtracking")
      opts.method = SolveMethod::gradient_backtracking;
    else
      fail(child(path, "method"), "expected newton_trust or gradient_backtracking");
  }
  opts.tol_grad = number_or(v, path, "tol_grad", opts.tol_grad);
  opts.tol_energy = number_or(v, path, "tol_energy", opts.tol_energy);
  if (const json* m = find(v, "max_iter")) opts.max_iter = as_count(*m, child(path, "max_iter"));
}

void parse_grid(const json& v, const std::string& path, ExperimentConfig& cfg) {
  require_object(v, path);
  allow_keys(v, path, {"dim", "n_nodes"});
  if (const json* d = find(v, "dim")) {
    if (!d->is_number_integer() || (d->get<int>() != 1 && d->get<int>() != 2)) fail(child(path, "dim"), "must be 1 or 2");
    cfg.dim = d->get<int>();
  }
  const json& n = require(v, path, "n_nodes");
  const std::string npath = child(path, "n_nodes");
  if (n.is_array()) {
    for (std::size_t i = 0; i < n.size(); ++i) cfg.grids.push_back(as_count(n[i], npath + "/" + std::to_string(i)));
  } else {
    cfg.grids.push_back(as_count(n, npath));
  }
  if (cfg.grids.empty()) fail(npath, "needs at least one grid");
  for (std::size_t g : cfg.grids)
    if (g < 3) fail(npath, "grids need at least 3 nodes per axis");
}

EstimateId parse_estimate_id(const json& v, const std::string& path) {
  const std::string name = as_string(v, path);
  for (EstimateId id : {EstimateId::fin, EstimateId::hdfin, EstimateId::hd6, EstimateId::sob})
    if (to_string(id) == name) return id;
  fail(path, "expected one of fin, hdfin, hd6, sob");
}

std::string position(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

std::string to_string(Experiment e) {
  switch (e) {
  case Experiment::exponents: return "exponents";
  case Experiment::solve: return "solve";
  case Experiment::oracle_compare: return "oracle-compare";
  case Experiment::estimate_check: return "estimate-check";
  case Experiment::moser: return "moser";
  case Experiment::lavrentiev: return "lavrentiev";
  case Experiment::counterexample: return "counterexample";
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::exponents, Experiment::solve, Experiment::oracle_compare, Experiment::estimate_check,
                       Experiment::moser, Experiment::lavrentiev, Experiment::counterexample})
    if (to_string(e) == name) return e;
  return std::nullopt;
}

ExperimentConfig parse_config(std::string_view text, std::optional<Experiment> expected) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("config is not valid JSON at " + position(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  require_object(root, "");
  allow_keys(root, "",
             {"schema_version", "experiment", "density", "profile", "grid", "boundary", "solver", "oracle", "estimate",
              "moser", "lavrentiev", "output", "seed"});

  if (const json* v = find(root, "schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != kConfigSchemaVersion)
      fail("/schema_version", "unsupported schema version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }

  ExperimentConfig cfg;
  if (const json* v = find(root, "experiment")) {
    const auto e = parse_experiment(as_string(*v, "/experiment"));
    if (!e) fail("/experiment", "unknown experiment");
    cfg.experiment = e;
  }
  if (expected) {
    if (cfg.experiment && *cfg.experiment != *expected)
      fail("/experiment", "config is for '" + to_string(*cfg.experiment) + "', not '" + to_string(*expected) + "'");
    cfg.experiment = expected;
  }
  if (!cfg.experiment) fail("/experiment", "required field missing");
  const Experiment ex = *cfg.experiment;

  if (const json* v = find(root, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      fail("/seed", "expected a nonnegative integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  if (const json* v = find(root, "output")) cfg.output = as_string(*v, "/output");
  if (const json* v = find(root, "solver")) parse_solver(*v, "/solver", cfg.solver);

  const bool needs_grid = ex == Experiment::solve || ex == Experiment::estimate_check || ex == Experiment::moser ||
                          ex == Experiment::lavrentiev || ex == Experiment::oracle_compare ||
                          ex == Experiment::counterexample;
  const bool needs_density =
      ex == Experiment::solve || ex == Experiment::estimate_check || ex == Experiment::moser || ex == Experiment::lavrentiev;
  const bool needs_profile =
      ex == Experiment::exponents || ex == Experiment::estimate_check || ex == Experiment::moser;

  if (needs_grid)
    parse_grid(require(root, "", "grid"), "/grid", cfg);
  else if (const json* v = find(root, "grid"))
    parse_grid(*v, "/grid", cfg);

  if (needs_profile) cfg.profile = parse_profile(require(root, "", "profile"), "/profile");
  else if (const json* v = find(root, "profile")) cfg.profile = parse_profile(*v, "/profile");

  if (ex == Experiment::oracle_compare || ex == Experiment::counterexample) {
    const json& o = require(root, "", "oracle");
    require_object(o, "/oracle");
    allow_keys(o, "/oracle", {"alpha", "p", "left", "right"});
    OracleSpec spec;
    spec.alpha = number(o, "/oracle", "alpha");
    spec.p = number(o, "/oracle", "p");
    spec.left = number_or(o, "/oracle", "left", spec.left);
    spec.right = number_or(o, "/oracle", "right", spec.right);
    cfg.oracle = spec;
    if (cfg.dim != 1) fail("/grid/dim", "the oracle problem is one-dimensional");
  }

  if (needs_density) {
    cfg.density = parse_density(require(root, "", "density"), "/density", cfg.dim);
    cfg.boundary = parse_boundary(require(root, "", "boundary"), "/boundary", cfg.dim);
  }

  if (ex == Experiment::estimate_check) {
    if (const json* v = find(root, "estimate")) {
      require_object(*v, "/estimate");
      allow_keys(*v, "/estimate", {"ids", "R0", "theta", "rho", "R", "sobolev_samples"});
      if (const json* ids = find(*v, "ids")) {
        if (!ids->is_array() || ids->empty()) fail("/estimate/ids", "expected a nonempty array");
        cfg.estimate.ids.clear();
        for (std::size_t i = 0; i < ids->size(); ++i)
          cfg.estimate.ids.push_back(parse_estimate_id((*ids)[i], "/estimate/ids/" + std::to_string(i)));
      }
      cfg.estimate.R0 = number_or(*v, "/estimate", "R0", cfg.estimate.R0);
      cfg.estimate.theta = number_or(*v, "/estimate", "theta", cfg.estimate.theta);
      cfg.estimate.rho = number_or(*v, "/estimate", "rho", cfg.estimate.rho);
      cfg.estimate.R = number_or(*v, "/estimate", "R", cfg.estimate.R);
      if (const json* n = find(*v, "sobolev_samples"))
        cfg.estimate.sobolev_samples = as_count(*n, "/estimate/sobolev_samples");
    }
  }
  if (ex == Experiment::moser) {
    if (const json* v = find(root, "moser")) {
      require_object(*v, "/moser");
      allow_keys(*v, "/moser", {"steps"});
      if (const json* n = find(*v, "steps")) cfg.moser_steps = as_count(*n, "/moser/steps");
    }
  }
  if (ex == Experiment::lavrentiev) {
    const json& v = require(root, "", "lavrentiev");
    require_object(v, "/lavrentiev");
    allow_keys(v, "/lavrentiev", {"caps"});
    cfg.caps = as_numbers(require(v, "/lavrentiev", "caps"), "/lavrentiev/caps");
    if (cfg.caps.empty()) fail("/lavrentiev/caps", "needs at least one cap");
  }
  if (cfg.density && cfg.profile && cfg.profile->n() != cfg.dim)
    fail("/profile/n", "must equal the grid dimension");
  return cfg;
}

} // namespace pqlip
