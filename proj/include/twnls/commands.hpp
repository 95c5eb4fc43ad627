#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "twnls/config.hpp"
#include "twnls/grid.hpp"

namespace twnls {

/// Initial data named by cfg.f on the given grid.
GridFunction load_initial_data(const RunConfig& cfg, const GridPtr& grid);

/// Executes a validated configuration; returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses args (without the program name), runs, and maps errors to exit codes 0/1/2.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twnls
