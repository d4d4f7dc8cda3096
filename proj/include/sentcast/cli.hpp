#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace sentcast::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kDivergence = 3,
};

/// Runs the `sentcast` command line. `args[0]` is the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sentcast::cli
