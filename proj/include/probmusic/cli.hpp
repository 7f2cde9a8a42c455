#pragma once

#include <ostream>

namespace probmusic {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// probmusic parse|info|generate|render|play|serve ... ; scores go to `out`,
// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace probmusic
