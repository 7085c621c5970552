#include "lazevm/surface.hpp"

#include <fstream>
#include <sstream>

#include "lazevm/validate.hpp"
#include "lexer.hpp"

namespace lazevm {

using detail::Tok;
using detail::TokenCursor;

namespace {

constexpr std::string_view kBoxTag = "Box";

class Parser {
public:
    Parser(std::string_view text, ConstructorTable constructors)
        : cur_(detail::lex(text, false)), constructors_(std::move(constructors)) {}

    SourceProgram program() {
        SourceProgram sp;
        while (cur_.isKeyword("data")) {
            DataDecl d = dataDecl();
            if (auto it = constructors_.find(d.tag); it != constructors_.end() && it->second != d.arity) {
                throw ProgramError(ProgramError::Kind::ArityMismatch, "constructor " + d.tag + " redeclared",
                                   d.loc);
            }
            constructors_[d.tag] = d.arity;
            sp.data.push_back(std::move(d));
        }
        while (cur_.peek().kind != Tok::End) {
            if (cur_.isKeyword("data")) {
                cur_.fail("data declarations must precede value declarations");
            }
            SourceDecl d;
            d.loc = cur_.peek().loc;
            d.name = cur_.expect(Tok::Ident, "declaration name").text;
            while (cur_.peek().kind == Tok::Ident && !detail::isKeywordText(cur_.peek().text)) {
                d.params.push_back(cur_.next().text);
            }
            cur_.expectSym("=");
            d.body = expr();
            cur_.expectSym(";");
            sp.decls.push_back(std::move(d));
        }
        return sp;
    }

    RawExpr expr() {
        SourceLoc loc = cur_.peek().loc;
        if (cur_.acceptSym("\\")) {
            std::vector<std::string> params;
            do {
                params.push_back(binder());
            } while (!cur_.isSym("->"));
            cur_.expectSym("->");
            return raw::lam(std::move(params), expr(), loc);
        }
        if (cur_.isKeyword("let")) {
            cur_.next();
            cur_.expectSym("{");
            std::vector<std::pair<std::string, RawExpr>> bs;
            while (!cur_.isSym("}")) {
                SourceLoc bloc = cur_.peek().loc;
                std::string name = cur_.expect(Tok::Ident, "binding name").text;
                std::vector<std::string> params;
                while (cur_.peek().kind == Tok::Ident && !detail::isKeywordText(cur_.peek().text)) {
                    params.push_back(cur_.next().text);
                }
                cur_.expectSym("=");
                RawExpr rhs = expr();
                if (!params.empty()) {
                    rhs = raw::lam(std::move(params), std::move(rhs), bloc);
                }
                bs.emplace_back(std::move(name), std::move(rhs));
                if (!cur_.acceptSym(";")) {
                    break;
                }
            }
            cur_.expectSym("}");
            cur_.expectKeyword("in");
            return raw::let(std::move(bs), expr(), loc);
        }
        if (cur_.isKeyword("case")) {
            return caseExpr();
        }
        return comparison();
    }

    void expectEnd() {
        if (cur_.peek().kind != Tok::End) {
            cur_.fail("unexpected " + detail::describe(cur_.peek()));
        }
    }

private:
    DataDecl dataDecl() {
        cur_.expectKeyword("data");
        DataDecl d;
        d.loc = cur_.peek().loc;
        d.tag = cur_.expect(Tok::Tag, "constructor name").text;
        cur_.expectSym("/");
        const auto& ar = cur_.expect(Tok::Int, "arity");
        d.arity = static_cast<int>(ar.value);
        cur_.expectSym(";");
        return d;
    }

    std::string binder() {
        if (cur_.acceptSym("_")) {
            return "_#" + std::to_string(++wildcards_);
        }
        return cur_.expect(Tok::Ident, "variable").text;
    }

    RawExpr caseExpr() {
        SourceLoc loc = cur_.next().loc;
        RawExpr scrut = expr();
        cur_.expectKeyword("of");
        cur_.expectSym("{");
        std::vector<RAlt> alts;
        RawExpr fallback;
        std::vector<SourceLoc> altLocs;
        while (!cur_.isSym("}")) {
            if (fallback) {
                cur_.fail("alternative after '_'");
            }
            if (cur_.acceptSym("_")) {
                cur_.expectSym("->");
                fallback = expr();
            } else {
                SourceLoc aloc = cur_.peek().loc;
                RAlt alt;
                alt.tag = cur_.expect(Tok::Tag, "constructor pattern").text;
                while (!cur_.isSym("->")) {
                    alt.binders.push_back(binder());
                }
                cur_.expectSym("->");
                alt.body = expr();
                altLocs.push_back(aloc);
                alts.push_back(std::move(alt));
            }
            if (!cur_.acceptSym(";")) {
                break;
            }
        }
        cur_.expectSym("}");
        bool unboxed = scrut->as<RDup>() != nullptr || scrut->as<RDeepDup>() != nullptr;
        if (unboxed && alts.size() == 1 && !fallback && alts[0].tag == kBoxTag && alts[0].binders.size() == 1 &&
            !constructors_.contains(kBoxTag)) {
            // dup and deepDup return their result directly; the Box pattern
            // only names it.
            return raw::let({{alts[0].binders[0], scrut}}, alts[0].body, loc);
        }
        for (std::size_t i = 0; i < alts.size(); ++i) {
            checkArity(alts[i].tag, alts[i].binders.size(), altLocs[i]);
        }
        return raw::caseOf(std::move(scrut), std::move(alts), std::move(fallback), loc);
    }

    RawExpr comparison() {
        RawExpr lhs = additive();
        SourceLoc loc = cur_.peek().loc;
        for (auto [sym, op] : {std::pair{"<=", PrimOp::Leq}, std::pair{"==", PrimOp::Eq}}) {
            if (cur_.acceptSym(sym)) {
                RawExpr rhs = additive();
                if (cur_.isSym("<=") || cur_.isSym("==")) {
                    cur_.fail("comparison operators do not associate");
                }
                return raw::prim(op, std::move(lhs), std::move(rhs), loc);
            }
        }
        return lhs;
    }

    RawExpr additive() {
        RawExpr lhs = multiplicative();
        for (;;) {
            SourceLoc loc = cur_.peek().loc;
            if (cur_.acceptSym("+")) {
                lhs = raw::prim(PrimOp::Add, std::move(lhs), multiplicative(), loc);
            } else if (cur_.acceptSym("-")) {
                lhs = raw::prim(PrimOp::Sub, std::move(lhs), multiplicative(), loc);
            } else {
                return lhs;
            }
        }
    }

    RawExpr multiplicative() {
        RawExpr lhs = unary();
        for (;;) {
            SourceLoc loc = cur_.peek().loc;
            if (!cur_.acceptSym("*")) {
                return lhs;
            }
            lhs = raw::prim(PrimOp::Mul, std::move(lhs), unary(), loc);
        }
    }

    RawExpr unary() {
        SourceLoc loc = cur_.peek().loc;
        if (cur_.acceptSym("-")) {
            if (cur_.peek().kind == Tok::Int) {
                auto v = static_cast<std::uint64_t>(cur_.next().value);
                return raw::lit(static_cast<std::int64_t>(0 - v), loc);
            }
            return raw::prim(PrimOp::Sub, raw::lit(0, loc), unary(), loc);
        }
        return application();
    }

    bool atArgument() const {
        const auto& t = cur_.peek();
        switch (t.kind) {
            case Tok::Int:
            case Tok::Tag: return true;
            case Tok::Ident: return !detail::isKeywordText(t.text) || t.text == "let" || t.text == "case";
            case Tok::Sym: return t.text == "(" || t.text == "[" || t.text == "\\";
            default: return false;
        }
    }

    // Trailing lambda/let/case arguments extend to the end of the expression.
    bool argument(std::vector<RawExpr>& args) {
        if (!atArgument()) {
            return false;
        }
        if (cur_.isSym("\\") || cur_.isKeyword("let") || cur_.isKeyword("case")) {
            args.push_back(expr());
            return false;
        }
        args.push_back(atom());
        return true;
    }

    std::vector<RawExpr> arguments() {
        std::vector<RawExpr> args;
        while (argument(args)) {
        }
        return args;
    }

    RawExpr application() {
        SourceLoc loc = cur_.peek().loc;
        RawExpr head;
        if (cur_.isKeyword("dup") || cur_.isKeyword("deepDup") || cur_.isKeyword("seq")) {
            std::string kw = cur_.next().text;
            std::size_t want = kw == "seq" ? 2 : 1;
            std::vector<RawExpr> args = arguments();
            if (args.size() < want) {
                throw ProgramError(ProgramError::Kind::ArityMismatch,
                                   kw + " expects " + std::to_string(want) + " argument(s)", loc);
            }
            if (kw == "dup") {
                head = raw::dup(args[0], loc);
            } else if (kw == "deepDup") {
                head = raw::deepDup(args[0], loc);
            } else {
                head = raw::seq(args[0], args[1], loc);
            }
            args.erase(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(want));
            return args.empty() ? head : raw::app(head, std::move(args), loc);
        }
        if (cur_.peek().kind == Tok::Tag) {
            std::string tag = cur_.next().text;
            std::vector<RawExpr> args = arguments();
            checkArity(tag, args.size(), loc);
            return raw::con(std::move(tag), std::move(args), loc);
        }
        if (!atArgument() || cur_.isSym("\\")) {
            cur_.fail("expected expression but found " + detail::describe(cur_.peek()));
        }
        head = atom();
        std::vector<RawExpr> args = arguments();
        return args.empty() ? head : raw::app(head, std::move(args), loc);
    }

    RawExpr atom() {
        SourceLoc loc = cur_.peek().loc;
        const auto& t = cur_.peek();
        if (t.kind == Tok::Int) {
            return raw::lit(cur_.next().value, loc);
        }
        if (t.kind == Tok::Ident && !detail::isKeywordText(t.text)) {
            return raw::var(cur_.next().text, loc);
        }
        if (t.kind == Tok::Tag) {
            std::string tag = cur_.next().text;
            checkArity(tag, 0, loc);
            return raw::con(std::move(tag), {}, loc);
        }
        if (cur_.acceptSym("(")) {
            RawExpr e = expr();
            cur_.expectSym(")");
            return e;
        }
        if (cur_.acceptSym("[")) {
            std::vector<RawExpr> items;
            if (!cur_.isSym("]")) {
                do {
                    items.push_back(expr());
                } while (cur_.acceptSym(","));
            }
            cur_.expectSym("]");
            checkArity("Cons", 2, loc);
            checkArity("Nil", 0, loc);
            RawExpr list = raw::con("Nil", {}, loc);
            for (auto it = items.rbegin(); it != items.rend(); ++it) {
                list = raw::con("Cons", {*it, list}, loc);
            }
            return list;
        }
        cur_.fail("expected expression but found " + detail::describe(t));
    }

    void checkArity(const std::string& tag, std::size_t got, SourceLoc loc) const {
        auto it = constructors_.find(tag);
        if (it == constructors_.end()) {
            throw ProgramError(ProgramError::Kind::UndeclaredConstructor, tag, loc);
        }
        if (static_cast<std::size_t>(it->second) != got) {
            throw ProgramError(ProgramError::Kind::ArityMismatch,
                               tag + " takes " + std::to_string(it->second) + " field(s), given " +
                                   std::to_string(got),
                               loc);
        }
    }

    TokenCursor cur_;
    ConstructorTable constructors_;
    int wildcards_ = 0;
};

}  // namespace

ConstructorTable SourceProgram::constructors() const {
    ConstructorTable t = builtinConstructors();
    for (const auto& d : data) {
        t[d.tag] = d.arity;
    }
    return t;
}

SourceProgram parseProgram(std::string_view text) { return Parser(text, builtinConstructors()).program(); }

RawExpr parseExpr(std::string_view text, const ConstructorTable& constructors) {
    Parser p(text, constructors);
    RawExpr e = p.expr();
    p.expectEnd();
    return e;
}

Program desugar(const SourceProgram& sp) {
    Program p;
    p.constructors = sp.constructors();
    NameSupply supply;
    NameEnv env;
    std::vector<Name> names;
    for (const auto& d : sp.decls) {
        Name n = supply.fresh(d.name);
        if (!env.emplace(d.name, n).second) {
            throw ProgramError(ProgramError::Kind::DuplicateName, "'" + d.name + "' declared twice", d.loc);
        }
        names.push_back(n);
    }
    auto main = env.find("main");
    if (main == env.end()) {
        throw ProgramError(ProgramError::Kind::MissingMain, "no declaration of 'main'");
    }
    for (std::size_t i = 0; i < sp.decls.size(); ++i) {
        const auto& d = sp.decls[i];
        RawExpr body = d.params.empty() ? d.body : raw::lam(d.params, d.body, d.loc);
        p.topLevel.push_back(Binding{names[i], normalize(body, env, supply)});
    }
    p.mainName = main->second;
    p.nextUniq = supply.peek();
    return p;
}

Program compileSource(std::string_view text) {
    Program p = desugar(parseProgram(text));
    requireValid(p);
    return p;
}

Program loadProgramFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return compileSource(ss.str());
}

}  // namespace lazevm
