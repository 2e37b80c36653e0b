#pragma once

#include <ostream>

namespace hadamard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

/// Default output directory when --out is not given.
inline constexpr const char* kOutDirEnv = "HADAMARD_OUT_DIR";

/// Entry point shared by the executable and the tests. Usage and input
/// errors print one line to err and return kExitUsage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hadamard::cli
