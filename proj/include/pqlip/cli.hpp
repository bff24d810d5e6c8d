#pragma once

#include "pqlip/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace pqlip {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitAssumption = 2, kExitSchema = 3 };

struct RunOptions {
  Experiment experiment = Experiment::exponents;
  std::string config_path;
  std::optional<std::string> out_dir; ///< overrides the config's "output"
  std::optional<std::uint64_t> seed;  ///< overrides the config's "seed"
  bool trace = false;                 ///< JSONL solver iterations on `err`
};

/// Runs one experiment, writing its reports, fields and manifest.json into
/// the output directory. Diagnostics go to `err`.
int run_experiment(const RunOptions& opts, std::ostream& err);

std::string sha256_hex(std::string_view bytes);

} // namespace pqlip
