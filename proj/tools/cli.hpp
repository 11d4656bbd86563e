#pragma once

// Command-line front end: subcommands pi-curve, simulate, ensemble, exact,
// entropy, equilibria, phase, trajectories and cgf.

#include <iosfwd>
#include <string>
#include <vector>

namespace erw::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDomain = 3,
  kResource = 4,
  kConvention = 5,
};

/// Runs one invocation; args excludes the program name. Output files are
/// written directly, diagnostics go to `err`, "-" as --out writes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key=value tokens from a config file: the "# erw <sub> ..." echo line,
/// plain key=value lines, or a JSON object (its "config" string, or its
/// top-level scalar fields). Other lines are ignored.
std::vector<std::string> read_config_tokens(const std::string& path, std::string* subcommand);

}  // namespace erw::cli
