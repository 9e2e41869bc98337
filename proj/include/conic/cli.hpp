#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conic {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitSolved = 0,
  kExitUsage = 1,
  kExitNoConverge = 2,
  kExitCertInvalid = 3,
  kExitInfeasible = 4,
};

/// Entry point of the `conic` tool. Subcommands: solve, gen, certify, bench.
int run(int argc, const char* const* argv);

/// Same as run() with explicit streams, for in-process testing.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conic
