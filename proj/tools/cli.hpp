#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tsreg::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 1,
    kNotConverged = 2,
};

/// Runs the command line `args` (args[0] is the program name). Machine
/// readable output goes to `out`, diagnostics and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tsreg::cli
