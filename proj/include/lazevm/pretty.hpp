#pragma once

#include <string>
#include <string_view>

#include "lazevm/expr.hpp"

namespace lazevm {

// Deterministic single-line rendering; `readCoreExpr` is its inverse.
std::string pretty(const Expr& e);

// One `data Tag/arity;` line per non-builtin constructor, an `entry` line,
// then one `name = expr;` line per top-level binding.
std::string prettyProgram(const Program& p);

// Parsers for the printed form. Names must carry their `#uniq` suffix.
// Throw ProgramError on malformed text; the program reader also checks
// constructor arities against its data lines.
Expr readCoreExpr(std::string_view text);
Program readCoreProgram(std::string_view text);

// Top-level names are treated as one recursive binding group.
bool alphaEquivalent(const Program& a, const Program& b);

}  // namespace lazevm
