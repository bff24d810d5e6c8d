#include "pqlip/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Discrete experiments for degenerate (p,q)-growth functionals"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool trace = false;

  const std::pair<pqlip::Experiment, const char*> subcommands[] = {
      {pqlip::Experiment::exponents, "classify an exponent profile and print its derived exponents"},
      {pqlip::Experiment::solve, "minimize the discrete energy on each configured grid"},
      {pqlip::Experiment::oracle_compare, "compare the 1D solver against the closed-form minimizer"},
      {pqlip::Experiment::estimate_check, "evaluate the a priori estimates on discrete minimizers"},
      {pqlip::Experiment::moser, "track the L^p norm ladder of the gradient weight"},
      {pqlip::Experiment::lavrentiev, "compare capped and unrestricted minimal energies"},
      {pqlip::Experiment::counterexample, "measure gradient blow-up under grid refinement"},
  };
  for (const auto& [e, help] : subcommands) {
    auto* sub = app.add_subcommand(pqlip::to_string(e), help);
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "seed for randomized sampling (overrides the config)");
    sub->add_flag("--trace", trace, "stream solver iterations as JSON lines on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pqlip::kExitSchema;
  }

  pqlip::RunOptions opts;
  opts.experiment = *pqlip::parse_experiment(app.get_subcommands().front()->get_name());
  opts.config_path = config;
  opts.trace = trace;
  auto* sub = app.get_subcommands().front();
  if (sub->count("--out")) opts.out_dir = out;
  if (sub->count("--seed")) opts.seed = seed;
  return pqlip::run_experiment(opts, std::cerr);
}
