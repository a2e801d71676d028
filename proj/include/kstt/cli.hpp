#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kstt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Entry point of the `kstt` tool. args[0] is the program name.
// Subcommands: build-kg, train, eval, predict, gen-synth.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kstt
