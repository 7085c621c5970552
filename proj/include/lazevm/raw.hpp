#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lazevm/errors.hpp"
#include "lazevm/expr.hpp"
#include "lazevm/name.hpp"

namespace lazevm {

// Unnormalized expressions: string identifiers, arbitrary expressions in
// argument positions. Produced by the surface parser and by tests.
struct RawExprNode;
using RawExpr = std::shared_ptr<const RawExprNode>;

struct RVar {
    std::string name;
};
struct RLit {
    std::int64_t value;
};
struct RLam {
    std::vector<std::string> params;
    RawExpr body;
};
struct RApp {
    RawExpr fun;
    std::vector<RawExpr> args;
};
struct RLet {
    std::vector<std::pair<std::string, RawExpr>> bindings;
    RawExpr body;
};
struct RDup {
    RawExpr arg;
};
struct RDeepDup {
    RawExpr arg;
};
struct RCon {
    std::string tag;
    std::vector<RawExpr> args;
};
struct RAlt {
    std::string tag;
    std::vector<std::string> binders;
    RawExpr body;
};
struct RCase {
    RawExpr scrutinee;
    std::vector<RAlt> alts;
    RawExpr fallback;
};
struct RPrim {
    PrimOp op;
    RawExpr lhs;
    RawExpr rhs;
};
struct RSeq {
    RawExpr forced;
    RawExpr then;
};

struct RawExprNode {
    std::variant<RVar, RLit, RLam, RApp, RLet, RDup, RDeepDup, RCon, RCase, RPrim, RSeq> node;
    SourceLoc loc;

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node);
    }
};

namespace raw {

RawExpr var(std::string name, SourceLoc loc = {});
RawExpr lit(std::int64_t value, SourceLoc loc = {});
RawExpr lam(std::vector<std::string> params, RawExpr body, SourceLoc loc = {});
RawExpr app(RawExpr fun, std::vector<RawExpr> args, SourceLoc loc = {});
RawExpr let(std::vector<std::pair<std::string, RawExpr>> bindings, RawExpr body, SourceLoc loc = {});
RawExpr dup(RawExpr arg, SourceLoc loc = {});
RawExpr deepDup(RawExpr arg, SourceLoc loc = {});
RawExpr con(std::string tag, std::vector<RawExpr> args = {}, SourceLoc loc = {});
RawExpr caseOf(RawExpr scrutinee, std::vector<RAlt> alts, RawExpr fallback = nullptr, SourceLoc loc = {});
RawExpr prim(PrimOp op, RawExpr lhs, RawExpr rhs, SourceLoc loc = {});
RawExpr seq(RawExpr forced, RawExpr then, SourceLoc loc = {});

}  // namespace raw

// Identifiers already in scope when normalizing, e.g. top-level names.
using NameEnv = std::map<std::string, Name, std::less<>>;

// Let-binds every non-variable argument under a fresh name and gives every
// binder a fresh Name. Throws ProgramError(UnboundVariable) for identifiers
// outside `env` and the enclosing binders.
Expr normalize(const RawExpr& e, const NameEnv& env, NameSupply& supply);

// Core expressions embed back into raw ones; names become their rendered
// text, so a NameEnv built with `renderEnv` resolves free names again.
RawExpr toRaw(const Expr& e);
NameEnv renderEnv(const std::vector<Name>& names);

}  // namespace lazevm
