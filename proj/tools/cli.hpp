#pragma once

namespace namo::tools {

// Exit codes: 0 success, 2 domain outcome (no path, goal not reached),
// 1 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDomain = 2;

int run_cli(int argc, char** argv);

}  // namespace namo::tools
