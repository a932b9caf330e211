#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tmm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Command-line overrides applied on top of the scenario file.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir;  // empty keeps the scenario's directory
  std::optional<int> samples;
  bool no_smooth = false;
  bool no_traction_opt = false;
};

/// Loads a scenario JSON, executes its mode and writes the artifact files.
/// Returns the process exit status: 0 success, 2 infeasible, 3 budget
/// exhausted. Throws ConfigError (exit 1) on malformed input.
int run_scenario(const std::string& scenario_path, const RunOptions& options = {});

}  // namespace tmm
