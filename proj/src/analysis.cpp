#include "lazevm/analysis.hpp"

#include <deque>
#include <utility>

#include "lazevm/detail/overloaded.hpp"

namespace lazevm {

using detail::Overloaded;

namespace {

template <bool Unguarded>
class FreeCollector {
public:
    explicit FreeCollector(std::vector<Name>& out) : out_(out) {}

    void visit(const Expr& e) {
        std::visit(
            Overloaded{
                [&](const Lam& n) {
                    bound_.push_back(&n.binder);
                    visit(n.body);
                    bound_.pop_back();
                },
                [&](const App& n) {
                    visit(n.fun);
                    use(n.arg);
                },
                [&](const Var& n) { use(n.name); },
                [&](const Let& n) {
                    auto mark = bound_.size();
                    for (const auto& b : n.bindings) {
                        bound_.push_back(&b.name);
                    }
                    for (const auto& b : n.bindings) {
                        visit(b.rhs);
                    }
                    visit(n.body);
                    bound_.resize(mark);
                },
                [&](const Dup& n) { use(n.name); },
                [&](const DeepDup& n) {
                    if constexpr (!Unguarded) {
                        use(n.name);
                    }
                },
                [&](const Con& n) {
                    for (const auto& a : n.args) {
                        use(a);
                    }
                },
                [&](const Case& n) {
                    visit(n.scrutinee);
                    for (const auto& alt : n.alts) {
                        auto mark = bound_.size();
                        for (const auto& b : alt.binders) {
                            bound_.push_back(&b);
                        }
                        visit(alt.body);
                        bound_.resize(mark);
                    }
                    if (n.fallback) {
                        visit(n.fallback);
                    }
                },
                [&](const Lit&) {},
                [&](const PrimApp& n) {
                    use(n.lhs);
                    use(n.rhs);
                },
                [&](const Seq& n) {
                    use(n.forced);
                    visit(n.then);
                },
            },
            e->node);
    }

private:
    void use(const Name& n) {
        for (auto it = bound_.rbegin(); it != bound_.rend(); ++it) {
            if (**it == n) {
                return;
            }
        }
        out_.push_back(n);
    }

    std::vector<Name>& out_;
    std::vector<const Name*> bound_;
};

struct NoFree {
    const Name* find(const Name&) const { return nullptr; }
};
struct SingleFree {
    const Name* from;
    const Name* to;
    const Name* find(const Name& n) const { return n == *from ? to : nullptr; }
};
struct MapFree {
    const Renaming* map;
    const Name* find(const Name& n) const {
        auto it = map->find(n);
        return it == map->end() ? nullptr : &it->second;
    }
};

// Rebuilds only the spine above changed names; untouched subtrees are
// returned by pointer. In fresh mode every binder is renamed; otherwise
// binders stay and only shadow free replacements.
template <typename FreeLookup>
class Rewriter {
public:
    Rewriter(FreeLookup free, NameSupply* supply) : free_(free), supply_(supply) {}

    Expr rewrite(const Expr& e) {
        return std::visit(
            Overloaded{
                [&](const Lam& n) -> Expr {
                    auto mark = scope_.size();
                    const Name& nb = bind(n.binder);
                    Expr body = rewrite(n.body);
                    scope_.resize(mark);
                    if (&nb == &n.binder && body == n.body) {
                        return e;
                    }
                    return core::lam(nb, std::move(body));
                },
                [&](const App& n) -> Expr {
                    Expr fun = rewrite(n.fun);
                    const Name& arg = lookup(n.arg);
                    if (fun == n.fun && &arg == &n.arg) {
                        return e;
                    }
                    return core::app(std::move(fun), arg);
                },
                [&](const Var& n) -> Expr {
                    const Name& v = lookup(n.name);
                    return &v == &n.name ? e : core::var(v);
                },
                [&](const Let& n) -> Expr {
                    auto mark = scope_.size();
                    bool changed = false;
                    std::vector<const Name*> names;
                    names.reserve(n.bindings.size());
                    for (const auto& b : n.bindings) {
                        const Name& nb = bind(b.name);
                        changed |= &nb != &b.name;
                        names.push_back(&nb);
                    }
                    std::vector<Expr> rhss;
                    rhss.reserve(n.bindings.size());
                    for (const auto& b : n.bindings) {
                        rhss.push_back(rewrite(b.rhs));
                        changed |= rhss.back() != b.rhs;
                    }
                    Expr body = rewrite(n.body);
                    changed |= body != n.body;
                    std::vector<Binding> out;
                    if (changed) {
                        out.reserve(n.bindings.size());
                        for (std::size_t i = 0; i < n.bindings.size(); ++i) {
                            out.push_back(Binding{*names[i], std::move(rhss[i])});
                        }
                    }
                    scope_.resize(mark);
                    return changed ? core::let(std::move(out), std::move(body)) : e;
                },
                [&](const Dup& n) -> Expr {
                    const Name& v = lookup(n.name);
                    return &v == &n.name ? e : core::dup(v);
                },
                [&](const DeepDup& n) -> Expr {
                    const Name& v = lookup(n.name);
                    return &v == &n.name ? e : core::deepDup(v);
                },
                [&](const Con& n) -> Expr {
                    std::vector<Name> args;
                    bool changed = false;
                    for (std::size_t i = 0; i < n.args.size(); ++i) {
                        const Name& a = lookup(n.args[i]);
                        if (&a != &n.args[i] && !changed) {
                            changed = true;
                            args.assign(n.args.begin(), n.args.begin() + static_cast<std::ptrdiff_t>(i));
                        }
                        if (changed) {
                            args.push_back(a);
                        }
                    }
                    return changed ? core::con(n.tag, std::move(args)) : e;
                },
                [&](const Case& n) -> Expr {
                    Expr scrut = rewrite(n.scrutinee);
                    bool changed = scrut != n.scrutinee;
                    std::vector<Alt> alts;
                    alts.reserve(n.alts.size());
                    for (const auto& alt : n.alts) {
                        auto mark = scope_.size();
                        Alt out{alt.tag, {}, nullptr};
                        out.binders.reserve(alt.binders.size());
                        for (const auto& b : alt.binders) {
                            const Name& nb = bind(b);
                            changed |= &nb != &b;
                            out.binders.push_back(nb);
                        }
                        out.body = rewrite(alt.body);
                        changed |= out.body != alt.body;
                        scope_.resize(mark);
                        alts.push_back(std::move(out));
                    }
                    Expr fallback = n.fallback ? rewrite(n.fallback) : nullptr;
                    changed |= fallback != n.fallback;
                    if (!changed) {
                        return e;
                    }
                    return core::caseOf(std::move(scrut), std::move(alts), std::move(fallback));
                },
                [&](const Lit&) -> Expr { return e; },
                [&](const PrimApp& n) -> Expr {
                    const Name& l = lookup(n.lhs);
                    const Name& r = lookup(n.rhs);
                    if (&l == &n.lhs && &r == &n.rhs) {
                        return e;
                    }
                    return core::prim(n.op, l, r);
                },
                [&](const Seq& n) -> Expr {
                    const Name& f = lookup(n.forced);
                    Expr then = rewrite(n.then);
                    if (&f == &n.forced && then == n.then) {
                        return e;
                    }
                    return core::seq(f, std::move(then));
                },
            },
            e->node);
    }

private:
    struct Entry {
        const Name* from;
        const Name* to;  // null: shadows a free replacement, maps to itself
    };

    const Name& bind(const Name& binder) {
        if (supply_ != nullptr) {
            fresh_.push_back(supply_->freshLike(binder));
            scope_.push_back(Entry{&binder, &fresh_.back()});
            return fresh_.back();
        }
        if (free_.find(binder) != nullptr) {
            scope_.push_back(Entry{&binder, nullptr});
        }
        return binder;
    }

    const Name& lookup(const Name& n) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
            if (*it->from == n) {
                return it->to != nullptr ? *it->to : n;
            }
        }
        const Name* r = free_.find(n);
        return r != nullptr ? *r : n;
    }

    FreeLookup free_;
    NameSupply* supply_;
    std::vector<Entry> scope_;
    std::deque<Name> fresh_;
};

}  // namespace

void appendFreeVars(const Expr& e, std::vector<Name>& out) {
    FreeCollector<false>(out).visit(e);
}

void appendUnguardedFreeVars(const Expr& e, std::vector<Name>& out) {
    FreeCollector<true>(out).visit(e);
}

NameSet freeVars(const Expr& e) {
    std::vector<Name> out;
    appendFreeVars(e, out);
    return NameSet(out.begin(), out.end());
}

NameSet unguardedFreeVars(const Expr& e) {
    std::vector<Name> out;
    appendUnguardedFreeVars(e, out);
    return NameSet(out.begin(), out.end());
}

Expr substitute(const Expr& e, const Renaming& replacements) {
    if (replacements.empty()) {
        return e;
    }
    return Rewriter<MapFree>(MapFree{&replacements}, nullptr).rewrite(e);
}

Expr substitute(const Expr& e, const Name& from, const Name& to) {
    return Rewriter<SingleFree>(SingleFree{&from, &to}, nullptr).rewrite(e);
}

Expr freshRename(const Expr& e, NameSupply& supply) {
    return Rewriter<NoFree>(NoFree{}, &supply).rewrite(e);
}

Expr freshRenameWith(const Expr& e, NameSupply& supply, const Renaming& freeReplacements) {
    if (freeReplacements.empty()) {
        return freshRename(e, supply);
    }
    return Rewriter<MapFree>(MapFree{&freeReplacements}, &supply).rewrite(e);
}

namespace {

class AlphaChecker {
public:
    bool eq(const Expr& a, const Expr& b) {
        if (a->node.index() != b->node.index()) {
            return false;
        }
        return std::visit(
            Overloaded{
                [&](const Lam& x) {
                    const auto& y = *b->as<Lam>();
                    auto mark = pairs_.size();
                    pairs_.emplace_back(&x.binder, &y.binder);
                    bool r = eq(x.body, y.body);
                    pairs_.resize(mark);
                    return r;
                },
                [&](const App& x) {
                    const auto& y = *b->as<App>();
                    return same(x.arg, y.arg) && eq(x.fun, y.fun);
                },
                [&](const Var& x) { return same(x.name, b->as<Var>()->name); },
                [&](const Let& x) {
                    const auto& y = *b->as<Let>();
                    if (x.bindings.size() != y.bindings.size()) {
                        return false;
                    }
                    auto mark = pairs_.size();
                    for (std::size_t i = 0; i < x.bindings.size(); ++i) {
                        pairs_.emplace_back(&x.bindings[i].name, &y.bindings[i].name);
                    }
                    bool r = eq(x.body, y.body);
                    for (std::size_t i = 0; r && i < x.bindings.size(); ++i) {
                        r = eq(x.bindings[i].rhs, y.bindings[i].rhs);
                    }
                    pairs_.resize(mark);
                    return r;
                },
                [&](const Dup& x) { return same(x.name, b->as<Dup>()->name); },
                [&](const DeepDup& x) { return same(x.name, b->as<DeepDup>()->name); },
                [&](const Con& x) {
                    const auto& y = *b->as<Con>();
                    if (x.tag != y.tag || x.args.size() != y.args.size()) {
                        return false;
                    }
                    for (std::size_t i = 0; i < x.args.size(); ++i) {
                        if (!same(x.args[i], y.args[i])) {
                            return false;
                        }
                    }
                    return true;
                },
                [&](const Case& x) {
                    const auto& y = *b->as<Case>();
                    if (x.alts.size() != y.alts.size() || !x.fallback != !y.fallback ||
                        !eq(x.scrutinee, y.scrutinee)) {
                        return false;
                    }
                    for (std::size_t i = 0; i < x.alts.size(); ++i) {
                        const auto& ax = x.alts[i];
                        const auto& ay = y.alts[i];
                        if (ax.tag != ay.tag || ax.binders.size() != ay.binders.size()) {
                            return false;
                        }
                        auto mark = pairs_.size();
                        for (std::size_t j = 0; j < ax.binders.size(); ++j) {
                            pairs_.emplace_back(&ax.binders[j], &ay.binders[j]);
                        }
                        bool r = eq(ax.body, ay.body);
                        pairs_.resize(mark);
                        if (!r) {
                            return false;
                        }
                    }
                    return !x.fallback || eq(x.fallback, y.fallback);
                },
                [&](const Lit& x) { return x.value == b->as<Lit>()->value; },
                [&](const PrimApp& x) {
                    const auto& y = *b->as<PrimApp>();
                    return x.op == y.op && same(x.lhs, y.lhs) && same(x.rhs, y.rhs);
                },
                [&](const Seq& x) {
                    const auto& y = *b->as<Seq>();
                    return same(x.forced, y.forced) && eq(x.then, y.then);
                },
            },
            a->node);
    }

private:
    // Both sides must resolve to the same binding pair, or both be free and equal.
    bool same(const Name& x, const Name& y) const {
        std::ptrdiff_t ix = -1;
        std::ptrdiff_t iy = -1;
        for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(pairs_.size()) - 1; i >= 0; --i) {
            if (ix < 0 && *pairs_[static_cast<std::size_t>(i)].first == x) {
                ix = i;
            }
            if (iy < 0 && *pairs_[static_cast<std::size_t>(i)].second == y) {
                iy = i;
            }
        }
        if (ix < 0 && iy < 0) {
            return x == y;
        }
        return ix == iy;
    }

    std::vector<std::pair<const Name*, const Name*>> pairs_;
};

}  // namespace

bool alphaEquivalent(const Expr& a, const Expr& b) { return AlphaChecker{}.eq(a, b); }

bool syntacticallyEqual(const Expr& a, const Expr& b) {
    if (a == b) {
        return true;
    }
    if (a->node.index() != b->node.index()) {
        return false;
    }
    return std::visit(
        Overloaded{
            [&](const Lam& x) {
                const auto& y = *b->as<Lam>();
                return x.binder == y.binder && syntacticallyEqual(x.body, y.body);
            },
            [&](const App& x) {
                const auto& y = *b->as<App>();
                return x.arg == y.arg && syntacticallyEqual(x.fun, y.fun);
            },
            [&](const Var& x) { return x.name == b->as<Var>()->name; },
            [&](const Let& x) {
                const auto& y = *b->as<Let>();
                if (x.bindings.size() != y.bindings.size()) {
                    return false;
                }
                for (std::size_t i = 0; i < x.bindings.size(); ++i) {
                    if (x.bindings[i].name != y.bindings[i].name ||
                        !syntacticallyEqual(x.bindings[i].rhs, y.bindings[i].rhs)) {
                        return false;
                    }
                }
                return syntacticallyEqual(x.body, y.body);
            },
            [&](const Dup& x) { return x.name == b->as<Dup>()->name; },
            [&](const DeepDup& x) { return x.name == b->as<DeepDup>()->name; },
            [&](const Con& x) {
                const auto& y = *b->as<Con>();
                return x.tag == y.tag && x.args == y.args;
            },
            [&](const Case& x) {
                const auto& y = *b->as<Case>();
                if (x.alts.size() != y.alts.size() || !x.fallback != !y.fallback ||
                    !syntacticallyEqual(x.scrutinee, y.scrutinee)) {
                    return false;
                }
                for (std::size_t i = 0; i < x.alts.size(); ++i) {
                    if (x.alts[i].tag != y.alts[i].tag || x.alts[i].binders != y.alts[i].binders ||
                        !syntacticallyEqual(x.alts[i].body, y.alts[i].body)) {
                        return false;
                    }
                }
                return !x.fallback || syntacticallyEqual(x.fallback, y.fallback);
            },
            [&](const Lit& x) { return x.value == b->as<Lit>()->value; },
            [&](const PrimApp& x) {
                const auto& y = *b->as<PrimApp>();
                return x.op == y.op && x.lhs == y.lhs && x.rhs == y.rhs;
            },
            [&](const Seq& x) {
                const auto& y = *b->as<Seq>();
                return x.forced == y.forced && syntacticallyEqual(x.then, y.then);
            },
        },
        a->node);
}

void appendBinders(const Expr& e, std::vector<Name>& out) {
    std::visit(Overloaded{
                   [&](const Lam& n) {
                       out.push_back(n.binder);
                       appendBinders(n.body, out);
                   },
                   [&](const App& n) { appendBinders(n.fun, out); },
                   [&](const Let& n) {
                       for (const auto& b : n.bindings) {
                           out.push_back(b.name);
                       }
                       for (const auto& b : n.bindings) {
                           appendBinders(b.rhs, out);
                       }
                       appendBinders(n.body, out);
                   },
                   [&](const Case& n) {
                       appendBinders(n.scrutinee, out);
                       for (const auto& alt : n.alts) {
                           out.insert(out.end(), alt.binders.begin(), alt.binders.end());
                           appendBinders(alt.body, out);
                       }
                       if (n.fallback) {
                           appendBinders(n.fallback, out);
                       }
                   },
                   [&](const Seq& n) { appendBinders(n.then, out); },
                   [&](const auto&) {},
               },
               e->node);
}

namespace {

template <typename Pred>
bool anyNode(const Expr& e, Pred pred) {
    if (pred(*e)) {
        return true;
    }
    return std::visit(Overloaded{
                          [&](const Lam& n) { return anyNode(n.body, pred); },
                          [&](const App& n) { return anyNode(n.fun, pred); },
                          [&](const Let& n) {
                              for (const auto& b : n.bindings) {
                                  if (anyNode(b.rhs, pred)) {
                                      return true;
                                  }
                              }
                              return anyNode(n.body, pred);
                          },
                          [&](const Case& n) {
                              if (anyNode(n.scrutinee, pred)) {
                                  return true;
                              }
                              for (const auto& alt : n.alts) {
                                  if (anyNode(alt.body, pred)) {
                                      return true;
                                  }
                              }
                              return n.fallback && anyNode(n.fallback, pred);
                          },
                          [&](const Seq& n) { return anyNode(n.then, pred); },
                          [&](const auto&) { return false; },
                      },
                      e->node);
}

}  // namespace

bool containsDeepDup(const Expr& e) {
    return anyNode(e, [](const ExprNode& n) { return n.is<DeepDup>(); });
}

bool containsDupOrDeepDup(const Expr& e) {
    return anyNode(e, [](const ExprNode& n) { return n.is<DeepDup>() || n.is<Dup>(); });
}

Expr eraseDups(const Expr& e) {
    return std::visit(
        Overloaded{
            [&](const Lam& n) -> Expr {
                Expr body = eraseDups(n.body);
                return body == n.body ? e : core::lam(n.binder, body);
            },
            [&](const App& n) -> Expr {
                Expr fun = eraseDups(n.fun);
                return fun == n.fun ? e : core::app(fun, n.arg);
            },
            [&](const Let& n) -> Expr {
                bool changed = false;
                std::vector<Binding> bs;
                for (const auto& b : n.bindings) {
                    bs.push_back(Binding{b.name, eraseDups(b.rhs)});
                    changed |= bs.back().rhs != b.rhs;
                }
                Expr body = eraseDups(n.body);
                changed |= body != n.body;
                return changed ? core::let(std::move(bs), body) : e;
            },
            [&](const Dup& n) -> Expr { return core::var(n.name); },
            [&](const DeepDup& n) -> Expr { return core::var(n.name); },
            [&](const Case& n) -> Expr {
                Expr scrut = eraseDups(n.scrutinee);
                bool changed = scrut != n.scrutinee;
                std::vector<Alt> alts;
                for (const auto& alt : n.alts) {
                    alts.push_back(Alt{alt.tag, alt.binders, eraseDups(alt.body)});
                    changed |= alts.back().body != alt.body;
                }
                Expr fallback = n.fallback ? eraseDups(n.fallback) : nullptr;
                changed |= fallback != n.fallback;
                return changed ? core::caseOf(scrut, std::move(alts), fallback) : e;
            },
            [&](const Seq& n) -> Expr {
                Expr then = eraseDups(n.then);
                return then == n.then ? e : core::seq(n.forced, then);
            },
            [&](const auto&) -> Expr { return e; },
        },
        e->node);
}

Program eraseDups(const Program& p) {
    Program out = p;
    for (auto& b : out.topLevel) {
        b.rhs = eraseDups(b.rhs);
    }
    return out;
}

std::size_t exprSize(const Expr& e) {
    return std::visit(Overloaded{
                          [&](const Lam& n) { return 1 + exprSize(n.body); },
                          [&](const App& n) { return 1 + exprSize(n.fun); },
                          [&](const Let& n) {
                              std::size_t s = 1 + exprSize(n.body);
                              for (const auto& b : n.bindings) {
                                  s += exprSize(b.rhs);
                              }
                              return s;
                          },
                          [&](const Case& n) {
                              std::size_t s = 1 + exprSize(n.scrutinee);
                              for (const auto& alt : n.alts) {
                                  s += exprSize(alt.body);
                              }
                              return n.fallback ? s + exprSize(n.fallback) : s;
                          },
                          [&](const Seq& n) { return 1 + exprSize(n.then); },
                          [&](const auto&) -> std::size_t { return 1; },
                      },
                      e->node);
}

}  // namespace lazevm
