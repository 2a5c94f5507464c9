#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace structsynth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitSolverFailure = 3;

/// Entry point shared by the executable and the tests. argv[0] is the
/// program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace structsynth::cli
