#pragma once

#include "config.hpp"
#include "report.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace xbarsim::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 1,
    kExitNumerical = 2,
    kExitTimeout = 3,
};

int exit_code_for(const std::exception& e) noexcept;

// Runs one subcommand against an already resolved configuration.
Report execute(const std::string& command, const RunConfig& cfg);

// Full command line (args excludes the program name). Results go to
// output.path, or to `out` when that is empty; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xbarsim::cli
