#include "lazevm/expr.hpp"

#include <charconv>

namespace lazevm {

std::optional<Name> Name::parse(std::string_view text) {
    auto hash = text.rfind('#');
    if (hash == std::string_view::npos || hash == 0 || hash + 1 == text.size()) {
        return std::nullopt;
    }
    std::uint64_t uniq = 0;
    auto digits = text.substr(hash + 1);
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), uniq);
    if (ec != std::errc() || end != digits.data() + digits.size()) {
        return std::nullopt;
    }
    return Name{std::string(text.substr(0, hash)), uniq};
}

std::string_view primOpSymbol(PrimOp op) {
    switch (op) {
        case PrimOp::Add: return "+";
        case PrimOp::Sub: return "-";
        case PrimOp::Mul: return "*";
        case PrimOp::Leq: return "<=";
        case PrimOp::Eq: return "==";
    }
    return "?";
}

namespace core {

namespace {
template <typename T>
Expr make(T node) {
    return std::make_shared<const ExprNode>(ExprNode{std::move(node)});
}
}  // namespace

Expr lam(Name binder, Expr body) { return make(Lam{std::move(binder), std::move(body)}); }
Expr app(Expr fun, Name arg) { return make(App{std::move(fun), std::move(arg)}); }
Expr var(Name name) { return make(Var{std::move(name)}); }
Expr let(std::vector<Binding> bindings, Expr body) {
    return make(Let{std::move(bindings), std::move(body)});
}
Expr dup(Name name) { return make(Dup{std::move(name)}); }
Expr deepDup(Name name) { return make(DeepDup{std::move(name)}); }
Expr con(std::string tag, std::vector<Name> args) {
    return make(Con{std::move(tag), std::move(args)});
}
Expr caseOf(Expr scrutinee, std::vector<Alt> alts, Expr fallback) {
    return make(Case{std::move(scrutinee), std::move(alts), std::move(fallback)});
}
Expr lit(std::int64_t value) { return make(Lit{value}); }
Expr prim(PrimOp op, Name lhs, Name rhs) { return make(PrimApp{op, std::move(lhs), std::move(rhs)}); }
Expr seq(Name forced, Expr then) { return make(Seq{std::move(forced), std::move(then)}); }

}  // namespace core

bool isValue(const Expr& e) {
    return e->is<Lam>() || e->is<Con>() || e->is<Lit>();
}

ConstructorTable builtinConstructors() {
    return ConstructorTable{{std::string(kTrueTag), 0}, {std::string(kFalseTag), 0}};
}

const Binding* Program::find(const Name& n) const {
    for (const auto& b : topLevel) {
        if (b.name == n) {
            return &b;
        }
    }
    return nullptr;
}

}  // namespace lazevm
