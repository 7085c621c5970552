#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lazevm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvalError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitOrdering = 3;

// `args` excludes the program name. `seedEnv` is the LAZEVM_SEED value,
// or null when unset.
int runCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const char* seedEnv = nullptr);

}  // namespace lazevm
