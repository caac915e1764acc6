#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavattack::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigOrIo = 2,
    kInfeasible = 3,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`. Returns one of ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wavattack::cli
