#pragma once

#include <iosfwd>

namespace smallgain::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitCheckFailed = 2,
};

/// Entry point of the `smallgain` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smallgain::cli
