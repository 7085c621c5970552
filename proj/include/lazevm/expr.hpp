#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lazevm/name.hpp"

namespace lazevm {

enum class PrimOp { Add, Sub, Mul, Leq, Eq };

std::string_view primOpSymbol(PrimOp op);

struct ExprNode;

// Core expressions are immutable trees; subtrees are shared freely.
using Expr = std::shared_ptr<const ExprNode>;

struct Binding {
    Name name;
    Expr rhs;
};

struct Alt {
    std::string tag;
    std::vector<Name> binders;
    Expr body;
};

struct Lam {
    Name binder;
    Expr body;
};
// Arguments are always variables.
struct App {
    Expr fun;
    Name arg;
};
struct Var {
    Name name;
};
// Recursive: every binding scopes over all right-hand sides and the body.
struct Let {
    std::vector<Binding> bindings;
    Expr body;
};
struct Dup {
    Name name;
};
struct DeepDup {
    Name name;
};
struct Con {
    std::string tag;
    std::vector<Name> args;
};
struct Case {
    Expr scrutinee;
    std::vector<Alt> alts;
    Expr fallback;  // null when there is no `_` alternative
};
struct Lit {
    std::int64_t value;
};
struct PrimApp {
    PrimOp op;
    Name lhs;
    Name rhs;
};
// Force `forced` to WHNF, then continue with `then`.
struct Seq {
    Name forced;
    Expr then;
};

struct ExprNode {
    std::variant<Lam, App, Var, Let, Dup, DeepDup, Con, Case, Lit, PrimApp, Seq> node;

    template <typename T>
    const T* as() const {
        return std::get_if<T>(&node);
    }
    template <typename T>
    bool is() const {
        return std::holds_alternative<T>(node);
    }
};

namespace core {

Expr lam(Name binder, Expr body);
Expr app(Expr fun, Name arg);
Expr var(Name name);
Expr let(std::vector<Binding> bindings, Expr body);
Expr dup(Name name);
Expr deepDup(Name name);
Expr con(std::string tag, std::vector<Name> args = {});
Expr caseOf(Expr scrutinee, std::vector<Alt> alts, Expr fallback = nullptr);
Expr lit(std::int64_t value);
Expr prim(PrimOp op, Name lhs, Name rhs);
Expr seq(Name forced, Expr then);

}  // namespace core

// WHNF: lambda, constructor application or literal.
bool isValue(const Expr& e);

inline constexpr std::string_view kTrueTag = "True";
inline constexpr std::string_view kFalseTag = "False";

using ConstructorTable = std::map<std::string, int, std::less<>>;

// The constructor table always contains True/0 and False/0, which the
// comparison primitives produce.
ConstructorTable builtinConstructors();

struct Program {
    std::vector<Binding> topLevel;
    Name mainName;
    ConstructorTable constructors = builtinConstructors();
    // Strictly greater than every uniq used in the program.
    std::uint64_t nextUniq = 1;

    const Binding* find(const Name& n) const;
};

}  // namespace lazevm
