#include "oracles.hpp"

#include <cctype>
#include <map>
#include <vector>

namespace lazevm::testing {

namespace {

void freeWalk(const Expr& e, std::set<Name> bound, bool guardDeep, std::set<Name>& out) {
    auto use = [&](const Name& n) {
        if (!bound.contains(n)) {
            out.insert(n);
        }
    };
    const auto& node = e->node;
    if (const auto* l = std::get_if<Lam>(&node)) {
        bound.insert(l->binder);
        freeWalk(l->body, bound, guardDeep, out);
    } else if (const auto* a = std::get_if<App>(&node)) {
        freeWalk(a->fun, bound, guardDeep, out);
        use(a->arg);
    } else if (const auto* v = std::get_if<Var>(&node)) {
        use(v->name);
    } else if (const auto* l = std::get_if<Let>(&node)) {
        for (const auto& b : l->bindings) {
            bound.insert(b.name);
        }
        for (const auto& b : l->bindings) {
            freeWalk(b.rhs, bound, guardDeep, out);
        }
        freeWalk(l->body, bound, guardDeep, out);
    } else if (const auto* d = std::get_if<Dup>(&node)) {
        use(d->name);
    } else if (const auto* d = std::get_if<DeepDup>(&node)) {
        if (!guardDeep) {
            use(d->name);
        }
    } else if (const auto* c = std::get_if<Con>(&node)) {
        for (const auto& n : c->args) {
            use(n);
        }
    } else if (const auto* c = std::get_if<Case>(&node)) {
        freeWalk(c->scrutinee, bound, guardDeep, out);
        for (const auto& alt : c->alts) {
            auto inner = bound;
            inner.insert(alt.binders.begin(), alt.binders.end());
            freeWalk(alt.body, inner, guardDeep, out);
        }
        if (c->fallback) {
            freeWalk(c->fallback, bound, guardDeep, out);
        }
    } else if (const auto* p = std::get_if<PrimApp>(&node)) {
        use(p->lhs);
        use(p->rhs);
    } else if (const auto* s = std::get_if<Seq>(&node)) {
        use(s->forced);
        freeWalk(s->then, bound, guardDeep, out);
    }
}

}  // namespace

std::set<Name> fvOracle(const Expr& e) {
    std::set<Name> out;
    freeWalk(e, {}, false, out);
    return out;
}

std::set<Name> ufvOracle(const Expr& e) {
    std::set<Name> out;
    freeWalk(e, {}, true, out);
    return out;
}

std::set<Name> urOracle(const Heap& heap, const Expr& e) {
    std::set<Name> start = ufvOracle(e);
    std::vector<Name> universe;
    std::map<Name, std::size_t> index;
    auto intern = [&](const Name& n) {
        if (!index.contains(n)) {
            index.emplace(n, universe.size());
            universe.push_back(n);
        }
    };
    for (const auto& n : start) {
        intern(n);
    }
    for (CellId id : heap.ids()) {
        const Cell& c = heap.cell(id);
        intern(c.name);
        if (const Expr* rhs = c.bound()) {
            for (const auto& m : ufvOracle(*rhs)) {
                intern(m);
            }
        }
    }
    const std::size_t n = universe.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (CellId id : heap.ids()) {
        const Cell& c = heap.cell(id);
        if (const Expr* rhs = c.bound()) {
            for (const auto& m : ufvOracle(*rhs)) {
                reach[index[c.name]][index[m]] = true;
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i][k]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[k][j]) {
                    reach[i][j] = true;
                }
            }
        }
    }
    std::set<Name> out = start;
    for (const auto& s : start) {
        for (std::size_t j = 0; j < n; ++j) {
            if (reach[index[s]][j]) {
                out.insert(universe[j]);
            }
        }
    }
    return out;
}

IsolationVerdict isolationOracle(const Heap& gamma0, const Expr& e, std::uint64_t nextUniq, std::uint64_t maxSteps) {
    IsolationVerdict v;
    std::vector<std::pair<Name, const ExprNode*>> original;
    for (CellId id : gamma0.ids()) {
        const Cell& c = gamma0.cell(id);
        original.emplace_back(c.name, c.bound() ? c.bound()->get() : nullptr);
    }
    MachineOptions opts;
    opts.budget.maxSteps = maxSteps;
    MachineConfig cfg = configFor(gamma0, e, NameSupply(nextUniq), opts);
    auto check = [&] {
        for (const auto& [name, ptr] : original) {
            const Cell* c = cfg.heap.find(name);
            if (c == nullptr || c->bound() == nullptr || c->bound()->get() != ptr) {
                if (v.gammaUntouched) {
                    v.gammaUntouched = false;
                    v.why = name.render() + " changed at step " + std::to_string(cfg.metrics.steps);
                }
            }
        }
    };
    while (step(cfg)) {
        check();
    }
    std::set<Name> fvz = fvOracle(cfg.control);
    if (!fvz.empty()) {
        v.open = true;
        return v;
    }
    // z closed: nothing is reachable from it; also walk from dom Γ0 to make
    // sure Γ0 itself holds no new cell.
    std::set<Name> seen;
    std::vector<Name> work;
    for (const auto& [name, ptr] : original) {
        work.push_back(name);
    }
    while (!work.empty()) {
        Name n = work.back();
        work.pop_back();
        if (!seen.insert(n).second) {
            continue;
        }
        const Cell* c = cfg.heap.find(n);
        if (c == nullptr) {
            continue;
        }
        if (!gamma0.contains(n) && v.noSurvivors) {
            v.noSurvivors = false;
            v.why = n.render() + " survives";
        }
        if (const Expr* rhs = c->bound()) {
            for (const auto& m : fvOracle(*rhs)) {
                work.push_back(m);
            }
        }
    }
    return v;
}

namespace {

struct DotTok {
    enum Kind { Id, Sym, End } kind;
    std::string text;
};

bool lexDot(const std::string& s, std::vector<DotTok>& out, std::string* why) {
    std::size_t i = 0;
    auto fail = [&](const std::string& m) {
        if (why) {
            *why = m + " at offset " + std::to_string(i);
        }
        return false;
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '"') {
            std::string t;
            ++i;
            while (i < s.size() && s[i] != '"') {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    t += s[i];
                    ++i;
                }
                t += s[i++];
            }
            if (i >= s.size()) {
                return fail("unterminated string");
            }
            ++i;
            out.push_back({DotTok::Id, t});
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
            if (c == '-' && i + 1 < s.size() && (s[i + 1] == '>' || s[i + 1] == '-')) {
                out.push_back({DotTok::Sym, s.substr(i, 2)});
                i += 2;
                continue;
            }
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.')) {
                ++j;
            }
            if (j == i) {
                return fail("stray '-'");
            }
            out.push_back({DotTok::Id, s.substr(i, j - i)});
            i = j;
        } else if (std::string_view("{}[]=;,").find(c) != std::string_view::npos) {
            out.push_back({DotTok::Sym, std::string(1, c)});
            ++i;
        } else {
            return fail(std::string("unexpected '") + c + "'");
        }
    }
    out.push_back({DotTok::End, ""});
    return true;
}

class DotParser {
public:
    DotParser(std::vector<DotTok> toks, std::string* why) : t_(std::move(toks)), why_(why) {}

    bool graph() {
        if (isId("strict")) {
            ++p_;
        }
        if (isId("digraph")) {
            directed_ = true;
        } else if (!isId("graph")) {
            return fail("expected graph or digraph");
        }
        ++p_;
        if (t_[p_].kind == DotTok::Id) {
            ++p_;
        }
        if (!sym("{")) {
            return fail("expected '{'");
        }
        while (!isSym("}")) {
            if (t_[p_].kind == DotTok::End) {
                return fail("unexpected end");
            }
            if (!stmt()) {
                return false;
            }
            if (isSym(";")) {
                ++p_;
            }
        }
        ++p_;
        return t_[p_].kind == DotTok::End || fail("trailing tokens");
    }

private:
    bool stmt() {
        if (isId("graph") || isId("node") || isId("edge")) {
            ++p_;
            return attrList(true);
        }
        if (t_[p_].kind != DotTok::Id) {
            return fail("expected statement");
        }
        ++p_;
        if (isSym("=")) {
            ++p_;
            return id();
        }
        bool edge = false;
        while (isSym("->") || isSym("--")) {
            if ((t_[p_].text == "->") != directed_) {
                return fail("edge operator does not match graph kind");
            }
            ++p_;
            if (!id()) {
                return false;
            }
            edge = true;
        }
        (void)edge;
        return isSym("[") ? attrList(true) : true;
    }

    bool attrList(bool required) {
        if (!isSym("[")) {
            return !required || fail("expected '['");
        }
        while (isSym("[")) {
            ++p_;
            while (!isSym("]")) {
                if (!id() || !sym("=") || !id()) {
                    return fail("bad attribute");
                }
                if (isSym(",") || isSym(";")) {
                    ++p_;
                }
            }
            ++p_;
        }
        return true;
    }

    bool id() {
        if (t_[p_].kind != DotTok::Id) {
            return fail("expected identifier");
        }
        ++p_;
        return true;
    }
    bool isId(std::string_view s) const { return t_[p_].kind == DotTok::Id && t_[p_].text == s; }
    bool isSym(std::string_view s) const { return t_[p_].kind == DotTok::Sym && t_[p_].text == s; }
    bool sym(std::string_view s) {
        if (!isSym(s)) {
            return false;
        }
        ++p_;
        return true;
    }
    bool fail(const std::string& m) {
        if (why_ && why_->empty()) {
            *why_ = m + " at token " + std::to_string(p_) + " '" + t_[p_].text + "'";
        }
        return false;
    }

    std::vector<DotTok> t_;
    std::string* why_;
    std::size_t p_ = 0;
    bool directed_ = false;
};

}  // namespace

bool dotSyntaxOk(const std::string& text, std::string* why) {
    std::vector<DotTok> toks;
    if (!lexDot(text, toks, why)) {
        return false;
    }
    return DotParser(std::move(toks), why).graph();
}

}  // namespace lazevm::testing
