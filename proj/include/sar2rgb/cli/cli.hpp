#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace sar2rgb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Runs one subcommand. `args` excludes the program name. Machine-readable
// results go to `out`, log lines and help on errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace sar2rgb::cli
