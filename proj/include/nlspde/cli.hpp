#pragma once

#include "nlspde/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nlspde {

const std::vector<std::string>& subcommands();

/// Runs one subcommand and writes its artifacts under <output_dir>/<run_id>/.
/// Returns the exit status: 0 on success, 1 when a verify check fails.
/// Library errors propagate as exceptions.
int dispatch(const std::string& subcommand, RunConfig& config, std::ostream& out);

/// Command-line entry point: parses flags, dispatches, and turns exceptions into
/// a JSON object on `err` with a nonzero status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlspde
