#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dprisk::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
    kSuccess = 0,
    kInternalError = 1,
    kInputError = 2,
    kCalibrationExhausted = 3,
};

/// Runs the command line (args exclude the program name) against the given
/// streams. `serve` blocks until interrupted.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dprisk::cli
