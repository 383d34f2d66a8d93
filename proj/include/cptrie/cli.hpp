#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cptrie {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitProtocol = 4;

// args[0] is the program name. Output that a caller would pipe goes to
// `out`; diagnostics and warnings go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cptrie
