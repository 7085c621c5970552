#pragma once

#include <string>
#include <vector>

#include "lazevm/expr.hpp"

namespace lazevm {

// Checks the invariants every consumer of a Program relies on: main is
// defined, top-level right-hand sides are closed over the top level, every
// binder is globally distinct, constructor uses match the table, and
// nextUniq lies above every uniq in use. Returns one line per violation.
std::vector<std::string> validateProgram(const Program& p);

// Throws ProgramError(Malformed) listing the violations, if any.
void requireValid(const Program& p);

}  // namespace lazevm
