#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace whitebait {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInternalError = 2;

// Entry point of `whitebait train|predict|evaluate|stats`. args[0] is the
// program name. Never throws; failures are reported on `err` and mapped to an
// exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace whitebait
