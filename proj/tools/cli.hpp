#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vra::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,
    exit_numeric = 3,
};

/// Parses and dispatches one invocation. Diagnostics go to `diag`; data goes
/// to the files named by the flags.
int run(const std::vector<std::string>& args, std::ostream& diag);
int run(int argc, const char* const* argv);

} // namespace vra::cli
