#include "lazevm/gc.hpp"

#include <stdexcept>
#include <unordered_set>

namespace lazevm {

NameSet rootSet(const MachineConfig& cfg) {
    NameSet roots = freeVars(cfg.control);
    std::vector<Name> scratch;
    for (const auto& f : cfg.stack) {
        const auto& ns = frameNames(f, scratch);
        roots.insert(ns.begin(), ns.end());
    }
    return roots;
}

Heap collect(const Heap& heap, const NameSet& roots) {
    std::vector<Name> rootList(roots.begin(), roots.end());
    std::vector<Name> missing;
    auto order = heap.reachable(rootList, &missing);
    if (!missing.empty()) {
        throw std::invalid_argument("collect: dangling root " + missing.front().render());
    }
    std::unordered_set<CellId> keep(order.begin(), order.end());
    Heap out;
    for (CellId id : heap.ids()) {
        if (keep.contains(id)) {
            out.allocate(heap.cell(id));
        }
    }
    return out;
}

namespace {

// `hidden` is treated as unbound, as the Var rule removes an entered binding.
UrResult urWithHidden(const Heap& heap, const Expr& e, const Name* hidden) {
    UrResult out;
    std::vector<Name> work;
    appendUnguardedFreeVars(e, work);
    std::vector<Name> scratch;
    while (!work.empty()) {
        Name x = std::move(work.back());
        work.pop_back();
        if (!out.reached.insert(x).second) {
            continue;
        }
        const Cell* c = (hidden != nullptr && *hidden == x) ? nullptr : heap.find(x);
        if (c == nullptr) {
            if (hidden == nullptr || *hidden != x) {
                out.missing.insert(x);
            }
            continue;
        }
        if (const Expr* rhs = c->bound()) {
            scratch.clear();
            appendUnguardedFreeVars(*rhs, scratch);
            for (auto& y : scratch) {
                if (!out.reached.contains(y)) {
                    work.push_back(std::move(y));
                }
            }
        }
    }
    return out;
}

}  // namespace

UrResult unguardedReachable(const Heap& heap, const Expr& e) { return urWithHidden(heap, e, nullptr); }

NameSet reachableNames(const Heap& heap, const Expr& e) {
    std::vector<Name> roots;
    appendFreeVars(e, roots);
    NameSet out(roots.begin(), roots.end());
    for (CellId id : heap.reachable(roots)) {
        out.insert(heap.cell(id).name);
    }
    return out;
}

LemmaTrace::LemmaTrace(const MachineConfig& start) { points_.push_back(TracePoint{Rule::Lam, start}); }

StepObserver LemmaTrace::observer() {
    return [this](const MachineConfig& cfg, Rule r) {
        if (r == Rule::VarEnter || r == Rule::VarLeave) {
            points_.push_back(TracePoint{r, cfg});
        }
    };
}

void LemmaTrace::finish(const MachineConfig& finalCfg) {
    points_.push_back(TracePoint{Rule::VarLeave, finalCfg});
}

namespace {

bool available(const Heap& heap, const Name& n, const Name* hidden) {
    if (hidden != nullptr && *hidden == n) {
        return false;
    }
    const Cell* c = heap.find(n);
    return c != nullptr && c->bound() != nullptr;
}

// Γ0 ⊆ heap: same names bound to the same expressions.
bool contained(const Heap& gamma0, const Heap& heap, const Name* hidden, std::string* why) {
    for (CellId id : gamma0.ids()) {
        const Cell& c = gamma0.cell(id);
        if (!available(heap, c.name, hidden)) {
            if (why) {
                *why = c.name.render() + " missing or under evaluation";
            }
            return false;
        }
        const Cell* o = heap.find(c.name);
        if (c.bound() == nullptr || !syntacticallyEqual(*c.bound(), *o->bound())) {
            if (why) {
                *why = c.name.render() + " rebound";
            }
            return false;
        }
    }
    return true;
}

std::string firstShared(const NameSet& u, const NameSet& s) {
    for (const auto& n : s) {
        if (u.contains(n)) {
            return n.render();
        }
    }
    return {};
}

struct Instance {
    const Heap& gamma;
    const Expr& e;
    const Name* gammaHidden;
    const Heap& delta;
    const Expr& z;
    const Name* deltaHidden;
};

// Returns false when the precondition fails.
bool checkOne(const Heap& gamma0, const NameSet& u, const Instance& in, LemmaReport& rep,
              const std::string& where) {
    if (!contained(gamma0, in.gamma, in.gammaHidden, nullptr)) {
        return false;
    }
    if (!firstShared(u, urWithHidden(in.gamma, in.e, in.gammaHidden).reached).empty()) {
        return false;
    }
    auto note = [&](const std::string& what) {
        if (rep.counterexample.empty()) {
            rep.counterexample = where + ": " + what;
        }
    };
    std::string why;
    if (!contained(gamma0, in.delta, in.deltaHidden, &why)) {
        rep.a = false;
        note("(a) " + why);
    }
    if (auto s = firstShared(u, urWithHidden(in.delta, in.z, in.deltaHidden).reached); !s.empty()) {
        rep.b = false;
        note("(b) " + s + " unguarded-reachable from the result");
    }
    for (CellId id : in.gamma.ids()) {
        const Name& y = in.gamma.cell(id).name;
        if (!available(in.gamma, y, in.gammaHidden)) {
            continue;
        }
        Expr vy = core::var(y);
        if (!firstShared(u, urWithHidden(in.gamma, vy, in.gammaHidden).reached).empty()) {
            continue;
        }
        if (auto s = firstShared(u, urWithHidden(in.delta, vy, in.deltaHidden).reached); !s.empty()) {
            rep.c = false;
            note("(c) " + y.render() + " now reaches " + s);
        }
    }
    return true;
}

}  // namespace

LemmaReport checkLemmaInstance(const Heap& gamma0, const std::vector<TracePoint>& trace) {
    LemmaReport rep;
    if (trace.size() < 2) {
        throw std::invalid_argument("lemma check needs a start and a final configuration");
    }
    NameSet u;
    for (CellId id : gamma0.ids()) {
        u.insert(gamma0.cell(id).name);
    }
    const auto& first = trace.front().cfg;
    const auto& last = trace.back().cfg;
    if (!checkOne(gamma0, u, Instance{first.heap, first.control, nullptr, last.heap, last.control, nullptr}, rep,
                  "whole run")) {
        rep.skipped = true;
        return rep;
    }
    struct Open {
        std::size_t index;
        Name target;
        std::size_t stackSize;
    };
    std::vector<Open> open;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
        const auto& p = trace[i];
        if (p.rule == Rule::VarEnter) {
            const auto& top = std::get<UpdateInto>(p.cfg.stack.back());
            open.push_back(Open{i, top.target, p.cfg.stack.size()});
            continue;
        }
        if (open.empty() || p.cfg.stack.size() + 1 != open.back().stackSize) {
            continue;
        }
        const Open o = open.back();
        const Cell* cell = p.cfg.heap.find(o.target);
        if (cell == nullptr || cell->bound() == nullptr) {
            continue;
        }
        open.pop_back();
        const auto& enter = trace[o.index].cfg;
        Instance in{enter.heap, enter.control, &o.target, p.cfg.heap, *cell->bound(), &o.target};
        if (checkOne(gamma0, u, in, rep, "evaluation of " + o.target.render())) {
            ++rep.subChecked;
        } else {
            ++rep.subSkipped;
        }
    }
    return rep;
}

IsolationReport checkIsolation(const Heap& gamma0, const Expr& e, const MachineOptions& options) {
    IsolationReport rep;
    MachineOptions opts = options;
    opts.gc = GcPolicy::off();
    MachineConfig cfg = configFor(gamma0, e, NameSupply(supplyAbove(gamma0, e)), opts);
    std::unordered_set<Name, NameHash> u;
    for (CellId id : gamma0.ids()) {
        u.insert(gamma0.cell(id).name);
    }
    run(cfg, [&](const MachineConfig& c, Rule r) {
        if (r == Rule::VarEnter) {
            const auto& top = std::get<UpdateInto>(c.stack.back());
            if (u.contains(top.target) && rep.untouched) {
                rep.untouched = false;
                rep.detail = top.target.render() + " entered at step " + std::to_string(c.metrics.steps);
            }
        }
    });
    rep.result = EvalResult{cfg.heap, cfg.control, cfg.metrics, cfg.supply.peek()};
    NameSet fvz = freeVars(cfg.control);
    if (!fvz.empty()) {
        rep.skipped = true;
        return rep;
    }
    std::string why;
    if (!contained(gamma0, cfg.heap, nullptr, &why)) {
        rep.preserved = false;
        if (rep.detail.empty()) {
            rep.detail = why;
        }
    }
    auto anyNew = [&](const NameSet& roots) {
        std::vector<Name> rootList;
        for (const auto& r : roots) {
            if (cfg.heap.contains(r)) {
                rootList.push_back(r);
            }
        }
        for (CellId id : cfg.heap.reachable(rootList)) {
            if (!cfg.heap.cell(id).initial) {
                return std::optional<Name>(cfg.heap.cell(id).name);
            }
        }
        return std::optional<Name>();
    };
    NameSet withGamma0 = fvz;
    withGamma0.insert(u.begin(), u.end());
    for (const auto& roots : {fvz, withGamma0}) {
        if (auto n = anyNew(roots)) {
            rep.newCellsFreed = false;
            if (rep.detail.empty()) {
                rep.detail = n->render() + " allocated during the run is still reachable";
            }
        }
    }
    return rep;
}

}  // namespace lazevm
