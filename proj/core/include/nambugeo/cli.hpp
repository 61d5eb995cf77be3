#pragma once

#include <ostream>
#include <string>
#include <vector>

// Command-line front end: eval, verify, grid, catalog. Exit codes:
// 0 success / all checks pass, 1 verification failures, 2 usage or
// config errors, 3 degenerate evaluation point.

namespace nambugeo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// argv[0] is skipped; streams are std::cout / std::cerr.
int run_cli(int argc, char** argv);

}  // namespace nambugeo
