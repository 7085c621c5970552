#include "lazevm/pretty.hpp"

#include <algorithm>
#include <set>

#include "lazevm/analysis.hpp"
#include "lazevm/detail/overloaded.hpp"
#include "lexer.hpp"

namespace lazevm {

using detail::Overloaded;
using detail::Tok;
using detail::TokenCursor;

namespace {

void print(const Expr& e, std::string& out, bool headPosition);

void printNames(const std::vector<Name>& names, std::string& out) {
    for (const auto& n : names) {
        out += ' ';
        out += n.render();
    }
}

void printBody(const Expr& e, std::string& out) {
    std::visit(
        Overloaded{
            [&](const Lam& n) {
                out += "\\" + n.binder.render() + " -> ";
                printBody(n.body, out);
            },
            [&](const App& n) {
                print(n.fun, out, true);
                out += ' ';
                out += n.arg.render();
            },
            [&](const Var& n) { out += n.name.render(); },
            [&](const Let& n) {
                out += "let {";
                for (std::size_t i = 0; i < n.bindings.size(); ++i) {
                    out += i == 0 ? " " : "; ";
                    out += n.bindings[i].name.render() + " = ";
                    printBody(n.bindings[i].rhs, out);
                }
                out += n.bindings.empty() ? "} in " : " } in ";
                printBody(n.body, out);
            },
            [&](const Dup& n) { out += "dup " + n.name.render(); },
            [&](const DeepDup& n) { out += "deepDup " + n.name.render(); },
            [&](const Con& n) {
                out += n.tag;
                printNames(n.args, out);
            },
            [&](const Case& n) {
                out += "case ";
                printBody(n.scrutinee, out);
                out += " of {";
                bool first = true;
                for (const auto& alt : n.alts) {
                    out += first ? " " : "; ";
                    first = false;
                    out += alt.tag;
                    printNames(alt.binders, out);
                    out += " -> ";
                    printBody(alt.body, out);
                }
                if (n.fallback) {
                    out += first ? " " : "; ";
                    first = false;
                    out += "_ -> ";
                    printBody(n.fallback, out);
                }
                out += first ? "}" : " }";
            },
            [&](const Lit& n) { out += std::to_string(n.value); },
            [&](const PrimApp& n) {
                out += n.lhs.render() + " " + std::string(primOpSymbol(n.op)) + " " + n.rhs.render();
            },
            [&](const Seq& n) {
                out += "seq " + n.forced.render() + " ";
                printBody(n.then, out);
            },
        },
        e->node);
}

void print(const Expr& e, std::string& out, bool headPosition) {
    bool atomic = e->is<Var>() || e->is<App>();
    if (headPosition && !atomic) {
        out += '(';
        printBody(e, out);
        out += ')';
    } else {
        printBody(e, out);
    }
}

class CoreReader {
public:
    explicit CoreReader(std::string_view text) : cur_(detail::lex(text, true)) {}

    Expr expr() {
        if (cur_.acceptSym("\\")) {
            Name b = name();
            cur_.expectSym("->");
            return core::lam(std::move(b), expr());
        }
        if (cur_.isKeyword("let")) {
            cur_.next();
            cur_.expectSym("{");
            std::vector<Binding> bs;
            while (!cur_.isSym("}")) {
                Name n = name();
                cur_.expectSym("=");
                bs.push_back(Binding{std::move(n), expr()});
                if (!cur_.acceptSym(";")) {
                    break;
                }
            }
            cur_.expectSym("}");
            cur_.expectKeyword("in");
            return core::let(std::move(bs), expr());
        }
        if (cur_.isKeyword("case")) {
            cur_.next();
            Expr scrut = expr();
            cur_.expectKeyword("of");
            cur_.expectSym("{");
            std::vector<Alt> alts;
            Expr fallback;
            while (!cur_.isSym("}")) {
                if (fallback) {
                    cur_.fail("alternative after '_'");
                }
                if (cur_.acceptSym("_")) {
                    cur_.expectSym("->");
                    fallback = expr();
                } else {
                    const auto& tagTok = cur_.expect(Tok::Tag, "constructor");
                    Alt alt{tagTok.text, {}, nullptr};
                    SourceLoc loc = tagTok.loc;
                    while (cur_.peek().kind == Tok::CoreName) {
                        alt.binders.push_back(name());
                    }
                    uses_.push_back(Use{alt.tag, alt.binders.size(), loc});
                    cur_.expectSym("->");
                    alt.body = expr();
                    alts.push_back(std::move(alt));
                }
                if (!cur_.acceptSym(";")) {
                    break;
                }
            }
            cur_.expectSym("}");
            return core::caseOf(std::move(scrut), std::move(alts), std::move(fallback));
        }
        if (cur_.isKeyword("dup")) {
            cur_.next();
            return core::dup(name());
        }
        if (cur_.isKeyword("deepDup")) {
            cur_.next();
            return core::deepDup(name());
        }
        if (cur_.isKeyword("seq")) {
            cur_.next();
            Name f = name();
            return core::seq(std::move(f), expr());
        }
        if (cur_.peek().kind == Tok::Tag) {
            const auto& tagTok = cur_.next();
            std::string tag = tagTok.text;
            SourceLoc loc = tagTok.loc;
            std::vector<Name> args;
            while (cur_.peek().kind == Tok::CoreName) {
                args.push_back(name());
            }
            uses_.push_back(Use{tag, args.size(), loc});
            return core::con(std::move(tag), std::move(args));
        }
        if (cur_.peek().kind == Tok::Int) {
            return core::lit(cur_.next().value);
        }
        if (cur_.peek().kind == Tok::CoreName) {
            if (auto op = primOp(1)) {
                Name l = name();
                cur_.next();
                return core::prim(*op, std::move(l), name());
            }
        }
        Expr head;
        if (cur_.acceptSym("(")) {
            head = expr();
            cur_.expectSym(")");
        } else if (cur_.peek().kind == Tok::CoreName) {
            head = core::var(name());
        } else {
            cur_.fail("expected expression but found " + detail::describe(cur_.peek()));
        }
        while (cur_.peek().kind == Tok::CoreName) {
            head = core::app(std::move(head), name());
        }
        return head;
    }

    Program program() {
        Program p;
        std::optional<Name> entry;
        while (cur_.peek().kind != Tok::End) {
            if (cur_.isKeyword("data")) {
                cur_.next();
                const auto& tagTok = cur_.expect(Tok::Tag, "constructor");
                std::string tag = tagTok.text;
                SourceLoc loc = tagTok.loc;
                cur_.expectSym("/");
                const auto& ar = cur_.expect(Tok::Int, "arity");
                if (ar.value < 0) {
                    throw ProgramError(ProgramError::Kind::Syntax, "negative arity", ar.loc);
                }
                if (auto it = p.constructors.find(tag);
                    it != p.constructors.end() && it->second != ar.value) {
                    throw ProgramError(ProgramError::Kind::ArityMismatch,
                                       "constructor " + tag + " redeclared", loc);
                }
                p.constructors[tag] = static_cast<int>(ar.value);
            } else if (cur_.isKeyword("entry")) {
                cur_.next();
                entry = name();
            } else {
                SourceLoc loc = cur_.peek().loc;
                Name n = name();
                cur_.expectSym("=");
                Expr rhs = expr();
                if (p.find(n) != nullptr) {
                    throw ProgramError(ProgramError::Kind::DuplicateName, n.render(), loc);
                }
                p.topLevel.push_back(Binding{std::move(n), std::move(rhs)});
            }
            cur_.expectSym(";");
        }
        if (!entry) {
            throw ProgramError(ProgramError::Kind::MissingMain, "no entry line");
        }
        if (p.find(*entry) == nullptr) {
            throw ProgramError(ProgramError::Kind::MissingMain, entry->render() + " is not defined");
        }
        for (const auto& u : uses_) {
            auto it = p.constructors.find(u.tag);
            if (it == p.constructors.end()) {
                throw ProgramError(ProgramError::Kind::UndeclaredConstructor, u.tag, u.loc);
            }
            if (static_cast<std::size_t>(it->second) != u.arity) {
                throw ProgramError(ProgramError::Kind::ArityMismatch,
                                   u.tag + " expects " + std::to_string(it->second) + " fields, got " +
                                       std::to_string(u.arity),
                                   u.loc);
            }
        }
        p.mainName = *entry;
        p.nextUniq = maxUniq_ + 1;
        return p;
    }

    void expectEnd() {
        if (cur_.peek().kind != Tok::End) {
            cur_.fail("trailing input: " + detail::describe(cur_.peek()));
        }
    }

private:
    struct Use {
        std::string tag;
        std::size_t arity;
        SourceLoc loc;
    };

    Name name() {
        const auto& t = cur_.expect(Tok::CoreName, "name");
        auto n = Name::parse(t.text);
        if (!n) {
            throw ProgramError(ProgramError::Kind::Syntax, "bad name " + t.text, t.loc);
        }
        maxUniq_ = std::max(maxUniq_, n->uniq);
        return *n;
    }

    std::optional<PrimOp> primOp(std::size_t ahead) const {
        const auto& t = cur_.peek(ahead);
        if (t.kind != Tok::Sym) {
            return std::nullopt;
        }
        for (PrimOp op : {PrimOp::Add, PrimOp::Sub, PrimOp::Mul, PrimOp::Leq, PrimOp::Eq}) {
            if (t.text == primOpSymbol(op)) {
                return op;
            }
        }
        return std::nullopt;
    }

    TokenCursor cur_;
    std::vector<Use> uses_;
    std::uint64_t maxUniq_ = 0;
};

}  // namespace

std::string pretty(const Expr& e) {
    std::string out;
    printBody(e, out);
    return out;
}

std::string prettyProgram(const Program& p) {
    std::string out;
    const auto builtins = builtinConstructors();
    for (const auto& [tag, arity] : p.constructors) {
        if (!builtins.contains(tag)) {
            out += "data " + tag + "/" + std::to_string(arity) + ";\n";
        }
    }
    out += "entry " + p.mainName.render() + ";\n";
    for (const auto& b : p.topLevel) {
        out += b.name.render() + " = " + pretty(b.rhs) + ";\n";
    }
    return out;
}

Expr readCoreExpr(std::string_view text) {
    CoreReader r(text);
    Expr e = r.expr();
    r.expectEnd();
    return e;
}

Program readCoreProgram(std::string_view text) { return CoreReader(text).program(); }

bool alphaEquivalent(const Program& a, const Program& b) {
    if (a.topLevel.size() != b.topLevel.size() || a.constructors != b.constructors) {
        return false;
    }
    auto asLet = [](const Program& p) { return core::let(p.topLevel, core::var(p.mainName)); };
    return alphaEquivalent(asLet(a), asLet(b));
}

}  // namespace lazevm
