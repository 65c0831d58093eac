#pragma once

#include <iosfwd>

namespace couette {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

/// Subcommands: linear, simulate, sweep, verify-multipliers, toy.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace couette
