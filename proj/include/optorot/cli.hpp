#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace optorot {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,           // unknown subcommand or flag, bad flag value
  kExitConfig = 2,          // configuration rejected
  kExitNumerical = 3,       // no stationary state, unstable, diverged
  kExitOracleMismatch = 4,  // reproduce: an internal consistency check failed
};

/// Runs one CLI invocation. `args` excludes the program name. Output files go
/// to --out-dir or $OPTOROT_OUT_DIR when set, otherwise tables go to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace optorot
