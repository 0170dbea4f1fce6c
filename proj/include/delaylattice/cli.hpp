// Batch front end: JSON problem configs, subcommands, CSV reports.
#pragma once

#include <string>
#include <vector>

#include "delaylattice/model.hpp"

namespace dlat {

struct ToolConfig {
  InitialProblem problem;
  double horizon = 0.0;
  double compat_tol = 1e-9;
  double resolvent_tol = 1e-12;
  double certify_tol = 1e-8;
  std::uint64_t seed = 0;
};

/// Parses a problem config; throws std::invalid_argument with a field
/// diagnostic on malformed input.
ToolConfig load_config(const std::string& path);

/// Exit codes: 0 success, 1 validation failure, 2 numerical non-convergence.
int run_cli(const std::vector<std::string>& args);

}  // namespace dlat
