#pragma once

#include <iosfwd>

namespace spt {

enum ExitCode : int {
  kExitOk = 0,
  kExitDomain = 2,
  kExitNoConvergence = 3,
  kExitUsage = 64,
  kExitScenario = 65,
};

/// Entry point of the spt-snr tool. Data goes to `out` (or --output),
/// diagnostics to `err`; `in` backs `--scenario -`.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace spt
