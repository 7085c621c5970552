#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "lazevm/expr.hpp"
#include "lazevm/name.hpp"

namespace lazevm {

using NameSet = std::set<Name>;
using Renaming = std::unordered_map<Name, Name, NameHash>;

NameSet freeVars(const Expr& e);

// Like freeVars, except that `deepDup x` contributes nothing.
NameSet unguardedFreeVars(const Expr& e);

// Appends free variables (possibly with repeats) without building a set.
void appendFreeVars(const Expr& e, std::vector<Name>& out);
void appendUnguardedFreeVars(const Expr& e, std::vector<Name>& out);

// Replaces free occurrences of each key. Binders are never renamed, and a
// binder that equals a key shadows it. Capture is the caller's problem.
Expr substitute(const Expr& e, const Renaming& replacements);
Expr substitute(const Expr& e, const Name& from, const Name& to);

// Renames every binder in `e` to a fresh name drawn from `supply`; free
// variables untouched. Defined for any expression, not only values.
Expr freshRename(const Expr& e, NameSupply& supply);

// freshRename followed by substitute(_, freeReplacements), in one pass.
Expr freshRenameWith(const Expr& e, NameSupply& supply, const Renaming& freeReplacements);

bool alphaEquivalent(const Expr& a, const Expr& b);

// Exact structural equality, names included.
bool syntacticallyEqual(const Expr& a, const Expr& b);

// Every binder occurrence (lambda, let, case alternative), in tree order.
void appendBinders(const Expr& e, std::vector<Name>& out);

bool containsDeepDup(const Expr& e);
bool containsDupOrDeepDup(const Expr& e);

// Replaces `dup x` and `deepDup x` by `x`.
Expr eraseDups(const Expr& e);
Program eraseDups(const Program& p);

std::size_t exprSize(const Expr& e);

}  // namespace lazevm
