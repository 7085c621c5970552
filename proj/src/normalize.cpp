#include <string_view>

#include "lazevm/detail/overloaded.hpp"
#include "lazevm/raw.hpp"

namespace lazevm {

using detail::Overloaded;

namespace raw {

namespace {
template <typename T>
RawExpr make(T node, SourceLoc loc) {
    return std::make_shared<const RawExprNode>(RawExprNode{std::move(node), loc});
}
}  // namespace

RawExpr var(std::string name, SourceLoc loc) { return make(RVar{std::move(name)}, loc); }
RawExpr lit(std::int64_t value, SourceLoc loc) { return make(RLit{value}, loc); }
RawExpr lam(std::vector<std::string> params, RawExpr body, SourceLoc loc) {
    return make(RLam{std::move(params), std::move(body)}, loc);
}
RawExpr app(RawExpr fun, std::vector<RawExpr> args, SourceLoc loc) {
    return make(RApp{std::move(fun), std::move(args)}, loc);
}
RawExpr let(std::vector<std::pair<std::string, RawExpr>> bindings, RawExpr body, SourceLoc loc) {
    return make(RLet{std::move(bindings), std::move(body)}, loc);
}
RawExpr dup(RawExpr arg, SourceLoc loc) { return make(RDup{std::move(arg)}, loc); }
RawExpr deepDup(RawExpr arg, SourceLoc loc) { return make(RDeepDup{std::move(arg)}, loc); }
RawExpr con(std::string tag, std::vector<RawExpr> args, SourceLoc loc) {
    return make(RCon{std::move(tag), std::move(args)}, loc);
}
RawExpr caseOf(RawExpr scrutinee, std::vector<RAlt> alts, RawExpr fallback, SourceLoc loc) {
    return make(RCase{std::move(scrutinee), std::move(alts), std::move(fallback)}, loc);
}
RawExpr prim(PrimOp op, RawExpr lhs, RawExpr rhs, SourceLoc loc) {
    return make(RPrim{op, std::move(lhs), std::move(rhs)}, loc);
}
RawExpr seq(RawExpr forced, RawExpr then, SourceLoc loc) {
    return make(RSeq{std::move(forced), std::move(then)}, loc);
}

}  // namespace raw

namespace {

std::string binderBase(std::string_view text) {
    auto hash = text.find('#');
    std::string base(text.substr(0, hash));
    return base.empty() ? std::string("v") : base;
}

class Normalizer {
public:
    Normalizer(const NameEnv& env, NameSupply& supply) : env_(env), supply_(supply) {}

    Expr go(const RawExpr& e) {
        return std::visit(
            Overloaded{
                [&](const RVar& n) -> Expr { return core::var(resolve(n.name, e->loc)); },
                [&](const RLit& n) -> Expr { return core::lit(n.value); },
                [&](const RLam& n) -> Expr {
                    auto mark = scope_.size();
                    std::vector<Name> binders;
                    for (const auto& p : n.params) {
                        binders.push_back(bind(p));
                    }
                    Expr body = go(n.body);
                    scope_.resize(mark);
                    for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
                        body = core::lam(*it, std::move(body));
                    }
                    return body;
                },
                [&](const RApp& n) -> Expr {
                    std::vector<const RawExpr*> args;
                    const RawExpr* head = &e;
                    while (const auto* a = (*head)->as<RApp>()) {
                        for (auto it = a->args.rbegin(); it != a->args.rend(); ++it) {
                            args.push_back(&*it);
                        }
                        head = &a->fun;
                    }
                    std::vector<Binding> pending;
                    Expr fun = go(*head);
                    for (auto it = args.rbegin(); it != args.rend(); ++it) {
                        fun = core::app(std::move(fun), atom(**it, pending));
                    }
                    (void)n;
                    return wrap(std::move(pending), std::move(fun));
                },
                [&](const RLet& n) -> Expr {
                    auto mark = scope_.size();
                    std::vector<Binding> bindings;
                    for (const auto& [name, rhs] : n.bindings) {
                        bindings.push_back(Binding{bind(name), nullptr});
                    }
                    for (std::size_t i = 0; i < n.bindings.size(); ++i) {
                        bindings[i].rhs = go(n.bindings[i].second);
                    }
                    Expr body = go(n.body);
                    scope_.resize(mark);
                    return core::let(std::move(bindings), std::move(body));
                },
                [&](const RDup& n) -> Expr {
                    std::vector<Binding> pending;
                    Name x = atom(n.arg, pending);
                    return wrap(std::move(pending), core::dup(std::move(x)));
                },
                [&](const RDeepDup& n) -> Expr {
                    std::vector<Binding> pending;
                    Name x = atom(n.arg, pending);
                    return wrap(std::move(pending), core::deepDup(std::move(x)));
                },
                [&](const RCon& n) -> Expr {
                    std::vector<Binding> pending;
                    std::vector<Name> args;
                    for (const auto& a : n.args) {
                        args.push_back(atom(a, pending));
                    }
                    return wrap(std::move(pending), core::con(n.tag, std::move(args)));
                },
                [&](const RCase& n) -> Expr {
                    Expr scrut = go(n.scrutinee);
                    std::vector<Alt> alts;
                    for (const auto& alt : n.alts) {
                        auto mark = scope_.size();
                        Alt out{alt.tag, {}, nullptr};
                        for (const auto& b : alt.binders) {
                            out.binders.push_back(bind(b));
                        }
                        out.body = go(alt.body);
                        scope_.resize(mark);
                        alts.push_back(std::move(out));
                    }
                    Expr fallback = n.fallback ? go(n.fallback) : nullptr;
                    return core::caseOf(std::move(scrut), std::move(alts), std::move(fallback));
                },
                [&](const RPrim& n) -> Expr {
                    std::vector<Binding> pending;
                    Name l = atom(n.lhs, pending);
                    Name r = atom(n.rhs, pending);
                    return wrap(std::move(pending), core::prim(n.op, std::move(l), std::move(r)));
                },
                [&](const RSeq& n) -> Expr {
                    std::vector<Binding> pending;
                    Name f = atom(n.forced, pending);
                    Expr then = go(n.then);
                    return wrap(std::move(pending), core::seq(std::move(f), std::move(then)));
                },
            },
            e->node);
    }

private:
    Name bind(const std::string& text) {
        Name n = supply_.fresh(binderBase(text));
        scope_.emplace_back(text, n);
        return n;
    }

    Name resolve(const std::string& text, SourceLoc loc) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
            if (it->first == text) {
                return it->second;
            }
        }
        if (auto it = env_.find(text); it != env_.end()) {
            return it->second;
        }
        throw ProgramError(ProgramError::Kind::UnboundVariable, "'" + text + "'", loc);
    }

    Name atom(const RawExpr& arg, std::vector<Binding>& pending) {
        if (const auto* v = arg->as<RVar>()) {
            return resolve(v->name, arg->loc);
        }
        Name a = supply_.fresh("a");
        pending.push_back(Binding{a, nullptr});
        std::size_t slot = pending.size() - 1;
        Expr rhs = go(arg);
        pending[slot].rhs = std::move(rhs);
        return a;
    }

    static Expr wrap(std::vector<Binding> pending, Expr body) {
        if (pending.empty()) {
            return body;
        }
        return core::let(std::move(pending), std::move(body));
    }

    const NameEnv& env_;
    NameSupply& supply_;
    std::vector<std::pair<std::string, Name>> scope_;
};

}  // namespace

Expr normalize(const RawExpr& e, const NameEnv& env, NameSupply& supply) {
    return Normalizer(env, supply).go(e);
}

RawExpr toRaw(const Expr& e) {
    auto v = [](const Name& n) { return raw::var(n.render()); };
    return std::visit(
        Overloaded{
            [&](const Lam& n) { return raw::lam({n.binder.render()}, toRaw(n.body)); },
            [&](const App& n) { return raw::app(toRaw(n.fun), {v(n.arg)}); },
            [&](const Var& n) { return v(n.name); },
            [&](const Let& n) {
                std::vector<std::pair<std::string, RawExpr>> bs;
                for (const auto& b : n.bindings) {
                    bs.emplace_back(b.name.render(), toRaw(b.rhs));
                }
                return raw::let(std::move(bs), toRaw(n.body));
            },
            [&](const Dup& n) { return raw::dup(v(n.name)); },
            [&](const DeepDup& n) { return raw::deepDup(v(n.name)); },
            [&](const Con& n) {
                std::vector<RawExpr> args;
                for (const auto& a : n.args) {
                    args.push_back(v(a));
                }
                return raw::con(n.tag, std::move(args));
            },
            [&](const Case& n) {
                std::vector<RAlt> alts;
                for (const auto& alt : n.alts) {
                    RAlt out{alt.tag, {}, toRaw(alt.body)};
                    for (const auto& b : alt.binders) {
                        out.binders.push_back(b.render());
                    }
                    alts.push_back(std::move(out));
                }
                return raw::caseOf(toRaw(n.scrutinee), std::move(alts),
                                   n.fallback ? toRaw(n.fallback) : nullptr);
            },
            [&](const Lit& n) { return raw::lit(n.value); },
            [&](const PrimApp& n) { return raw::prim(n.op, v(n.lhs), v(n.rhs)); },
            [&](const Seq& n) { return raw::seq(v(n.forced), toRaw(n.then)); },
        },
        e->node);
}

NameEnv renderEnv(const std::vector<Name>& names) {
    NameEnv env;
    for (const auto& n : names) {
        env.emplace(n.render(), n);
    }
    return env;
}

}  // namespace lazevm
