#pragma once

#include "pqlip/density.hpp"
#include "pqlip/diagnostics.hpp"
#include "pqlip/exponents.hpp"
#include "pqlip/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pqlip {

constexpr int kConfigSchemaVersion = 1;

enum class Experiment { exponents, solve, oracle_compare, estimate_check, moser, lavrentiev, counterexample };

std::string to_string(Experiment e);
/// Accepts the subcommand spelling ("oracle-compare", ...).
std::optional<Experiment> parse_experiment(std::string_view name);

struct OracleSpec {
  double alpha = 0.5;
  double p = 2.0;
  double left = 0.0;
  double right = 1.0;
};

struct EstimateSpec {
  std::vector<EstimateId> ids{EstimateId::fin};
  double R0 = 1.0;
  double theta = 1.0;
  double rho = 0.2;
  double R = 0.4;
  std::size_t sobolev_samples = 1;
};

struct ExperimentConfig {
  std::optional<Experiment> experiment;
  int dim = 1;
  std::vector<std::size_t> grids;
  std::optional<Density> density;
  std::optional<ExponentProfile> profile;
  std::optional<BoundaryData> boundary;
  SolveOptions solver;
  std::optional<OracleSpec> oracle;
  EstimateSpec estimate;
  std::size_t moser_steps = 8;
  std::vector<double> caps;
  std::string output = "out";
  std::uint64_t seed = 0;
};

/// Parses and validates a config document. Structural problems (bad JSON,
/// missing or mistyped fields, unknown keys) throw SchemaError whose message
/// names the line and column or the JSON path of the offending field.
/// Mathematical preconditions (p > q, r <= n, ...) surface as the library's
/// own exceptions.
ExperimentConfig parse_config(std::string_view text, std::optional<Experiment> expected = std::nullopt);

} // namespace pqlip
