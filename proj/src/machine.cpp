#include "lazevm/machine.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "lazevm/analysis.hpp"
#include "lazevm/detail/overloaded.hpp"

namespace lazevm {

using detail::Overloaded;

std::string_view ruleName(Rule r) {
    switch (r) {
        case Rule::Lam: return "Lam";
        case Rule::App: return "App";
        case Rule::VarEnter: return "Var-enter";
        case Rule::VarLeave: return "Var-leave";
        case Rule::Let: return "Let";
        case Rule::Dup: return "Dup";
        case Rule::Deep: return "Deep";
        case Rule::Con: return "Con";
        case Rule::Case: return "Case";
        case Rule::Prim: return "Prim";
        case Rule::Seq: return "Seq";
    }
    return "?";
}

namespace {

std::shared_ptr<const std::vector<Name>> caseAltNames(const Case& c) {
    auto out = std::make_shared<std::vector<Name>>();
    // The alternatives' binders are bound locally, so collect from a lambda
    // chain over them.
    for (const auto& alt : c.alts) {
        Expr body = alt.body;
        for (auto it = alt.binders.rbegin(); it != alt.binders.rend(); ++it) {
            body = core::lam(*it, body);
        }
        appendFreeVars(body, *out);
    }
    if (c.fallback) {
        appendFreeVars(c.fallback, *out);
    }
    return out;
}

}  // namespace

const std::vector<Name>& frameNames(const Frame& f, std::vector<Name>& scratch) {
    scratch.clear();
    return std::visit(Overloaded{
                          [&](const ApplyTo& x) -> const std::vector<Name>& {
                              scratch.push_back(x.arg);
                              return scratch;
                          },
                          [&](const UpdateInto& x) -> const std::vector<Name>& {
                              scratch.push_back(x.target);
                              return scratch;
                          },
                          [&](const CaseCont& x) -> const std::vector<Name>& {
                              if (!x.fvCache) {
                                  x.fvCache = caseAltNames(*x.node->as<Case>());
                              }
                              return *x.fvCache;
                          },
                          [&](const PrimLeft& x) -> const std::vector<Name>& {
                              scratch.push_back(x.rhs);
                              return scratch;
                          },
                          [&](const PrimRight&) -> const std::vector<Name>& { return scratch; },
                          [&](const SeqCont& x) -> const std::vector<Name>& {
                              if (!x.fvCache) {
                                  auto v = std::make_shared<std::vector<Name>>();
                                  appendFreeVars(x.then, *v);
                                  x.fvCache = std::move(v);
                              }
                              return *x.fvCache;
                          },
                      },
                      f);
}

namespace {

[[noreturn]] void fail(EvalError::Kind kind, std::string detail) {
    throw EvalError(kind, std::move(detail));
}

Expr boolean(bool b) { return core::con(std::string(b ? kTrueTag : kFalseTag)); }

Expr primResult(PrimOp op, std::int64_t l, std::int64_t r) {
    auto ul = static_cast<std::uint64_t>(l);
    auto ur = static_cast<std::uint64_t>(r);
    switch (op) {
        case PrimOp::Add: return core::lit(static_cast<std::int64_t>(ul + ur));
        case PrimOp::Sub: return core::lit(static_cast<std::int64_t>(ul - ur));
        case PrimOp::Mul: return core::lit(static_cast<std::int64_t>(ul * ur));
        case PrimOp::Leq: return boolean(l <= r);
        case PrimOp::Eq: return boolean(l == r);
    }
    fail(EvalError::Kind::PrimTypeMismatch, "unknown operator");
}

std::int64_t literalOperand(const Expr& v, PrimOp op) {
    const auto* lit = v->as<Lit>();
    if (lit == nullptr) {
        fail(EvalError::Kind::PrimTypeMismatch,
             "operand of '" + std::string(primOpSymbol(op)) + "' is not an integer");
    }
    return lit->value;
}

Expr bindFields(const Alt& alt, const std::vector<Name>& args) {
    if (args.empty()) {
        return alt.body;
    }
    if (args.size() == 1) {
        return substitute(alt.body, alt.binders[0], args[0]);
    }
    Renaming r;
    for (std::size_t i = 0; i < args.size(); ++i) {
        r.emplace(alt.binders[i], args[i]);
    }
    return substitute(alt.body, r);
}

class Stepper {
public:
    explicit Stepper(MachineConfig& cfg) : cfg_(cfg) {}

    Rule fire() {
        if (isValue(cfg_.control)) {
            return resume();
        }
        return std::visit(
            Overloaded{
                [&](const App& n) {
                    cfg_.stack.push_back(ApplyTo{n.arg});
                    cfg_.control = n.fun;
                    return Rule::App;
                },
                [&](const Var& n) { return enter(n.name); },
                [&](const Let& n) { return let(n); },
                [&](const Dup& n) { return dup(n.name); },
                [&](const DeepDup& n) { return deepDup(n.name); },
                [&](const Case& n) {
                    cfg_.stack.push_back(CaseCont{cfg_.control, nullptr});
                    cfg_.control = n.scrutinee;
                    return Rule::Case;
                },
                [&](const PrimApp& n) {
                    cfg_.stack.push_back(PrimLeft{n.op, n.rhs});
                    cfg_.control = core::var(n.lhs);
                    return Rule::Prim;
                },
                [&](const Seq& n) {
                    cfg_.stack.push_back(SeqCont{n.then, nullptr});
                    cfg_.control = core::var(n.forced);
                    return Rule::Seq;
                },
                [&](const auto&) -> Rule { throw std::logic_error("value reached dispatch"); },
            },
            cfg_.control->node);
    }

private:
    Rule resume() {
        Frame frame = std::move(cfg_.stack.back());
        cfg_.stack.pop_back();
        const Expr value = cfg_.control;
        return std::visit(
            Overloaded{
                [&](ApplyTo& f) {
                    const auto* lam = value->as<Lam>();
                    if (lam == nullptr) {
                        fail(EvalError::Kind::PrimTypeMismatch, "applied a non-function to " + f.arg.render());
                    }
                    cfg_.control = substitute(lam->body, lam->binder, f.arg);
                    return Rule::Lam;
                },
                [&](UpdateInto& f) {
                    cfg_.heap.setBinding(f.cell, Bound{value});
                    ++cfg_.metrics.thunkUpdates;
                    cfg_.control = hat(value);
                    return Rule::VarLeave;
                },
                [&](CaseCont& f) {
                    const auto& c = *f.node->as<Case>();
                    if (const auto* con = value->as<Con>()) {
                        for (const auto& alt : c.alts) {
                            if (alt.tag == con->tag && alt.binders.size() == con->args.size()) {
                                cfg_.control = bindFields(alt, con->args);
                                return Rule::Con;
                            }
                        }
                    }
                    if (!c.fallback) {
                        fail(EvalError::Kind::NoMatchingAlternative,
                             value->is<Con>() ? value->as<Con>()->tag : std::string("non-constructor value"));
                    }
                    cfg_.control = c.fallback;
                    return Rule::Con;
                },
                [&](PrimLeft& f) {
                    std::int64_t l = literalOperand(value, f.op);
                    cfg_.stack.push_back(PrimRight{f.op, l});
                    cfg_.control = core::var(f.rhs);
                    return Rule::Prim;
                },
                [&](PrimRight& f) {
                    cfg_.control = primResult(f.op, f.lhsValue, literalOperand(value, f.op));
                    return Rule::Prim;
                },
                [&](SeqCont& f) {
                    cfg_.control = f.then;
                    return Rule::Seq;
                },
            },
            frame);
    }

    Expr hat(const Expr& value) {
        return cfg_.options.varHat ? freshRename(value, cfg_.supply) : value;
    }

    CellId resolve(const Name& x) {
        auto id = cfg_.heap.lookup(x);
        if (!id) {
            fail(EvalError::Kind::UnboundName, x.render());
        }
        return *id;
    }

    Rule enter(const Name& x) {
        CellId id = resolve(x);
        const Cell& c = cfg_.heap.cell(id);
        const Expr* e = c.bound();
        if (e == nullptr) {
            fail(EvalError::Kind::BlackholeEntered, x.render());
        }
        if (isValue(*e)) {
            cfg_.control = hat(*e);
            return Rule::VarLeave;
        }
        Expr thunk = *e;
        cfg_.heap.setBinding(id, Blackhole{cfg_.metrics.steps});
        cfg_.stack.push_back(UpdateInto{x, id});
        cfg_.control = std::move(thunk);
        return Rule::VarEnter;
    }

    void allocate(Name n, Expr e, std::optional<Name> copyOf = std::nullopt) {
        const auto& budget = cfg_.options.budget;
        if (budget.maxCells != 0 && cfg_.metrics.allocations >= budget.maxCells) {
            fail(EvalError::Kind::BudgetExceeded, "allocation budget of " + std::to_string(budget.maxCells));
        }
        cfg_.heap.allocate(Cell{std::move(n), Bound{std::move(e)}, cfg_.metrics.steps, false, std::move(copyOf)});
        ++cfg_.metrics.allocations;
    }

    Rule let(const Let& n) {
        if (cfg_.options.varHat) {
            for (const auto& b : n.bindings) {
                allocate(b.name, b.rhs);
            }
            cfg_.control = n.body;
            return Rule::Let;
        }
        // Without value renaming the same let can run twice, so its binders
        // are made fresh here instead.
        Renaming r;
        for (const auto& b : n.bindings) {
            r.emplace(b.name, cfg_.supply.freshLike(b.name));
        }
        for (const auto& b : n.bindings) {
            allocate(r.at(b.name), substitute(b.rhs, r));
        }
        cfg_.control = substitute(n.body, r);
        return Rule::Let;
    }

    const Expr& sourceOf(const Name& x) {
        const Cell& c = cfg_.heap.cell(resolve(x));
        if (c.bound() == nullptr) {
            fail(EvalError::Kind::DupOfBlackhole, x.render());
        }
        return *c.bound();
    }

    Rule dup(const Name& x) {
        Expr copy = freshRename(sourceOf(x), cfg_.supply);
        Name x2 = cfg_.supply.freshLike(x);
        allocate(x2, std::move(copy), x);
        ++cfg_.metrics.dupCopies;
        cfg_.control = core::var(std::move(x2));
        return Rule::Dup;
    }

    Rule deepDup(const Name& x) {
        Expr e = sourceOf(x);
        NameSet ys = unguardedFreeVars(e);
        Name x2 = cfg_.supply.freshLike(x);
        Renaming r;
        std::vector<std::pair<Name, Name>> wrappers;
        for (const auto& y : ys) {
            Name y2 = cfg_.supply.freshLike(y);
            r.emplace(y, y2);
            wrappers.emplace_back(y, std::move(y2));
        }
        allocate(x2, freshRenameWith(e, cfg_.supply, r), x);
        for (auto& [y, y2] : wrappers) {
            allocate(std::move(y2), core::deepDup(y));
        }
        cfg_.metrics.deepDupThunks += wrappers.size();
        cfg_.control = core::var(std::move(x2));
        return Rule::Deep;
    }

    MachineConfig& cfg_;
};

void collectGarbage(MachineConfig& cfg) {
    std::vector<Name> roots;
    appendFreeVars(cfg.control, roots);
    std::vector<Name> scratch;
    for (const auto& f : cfg.stack) {
        const auto& ns = frameNames(f, scratch);
        roots.insert(roots.end(), ns.begin(), ns.end());
    }
    cfg.heap.retainReachable(roots);
}

void sampleAfterStep(MachineConfig& cfg) {
    auto& m = cfg.metrics;
    const auto& gc = cfg.options.gc;
    bool collect = false;
    switch (gc.mode) {
        case GcPolicy::Mode::Off: break;
        case GcPolicy::Mode::EveryStep:
            // Garbage never becomes reachable again, so the heap is an upper
            // bound on the live set: if it cannot beat the peak, collecting
            // now would not change any measurement.
            collect = cfg.options.strictEveryStep || cfg.heap.dynamicSize() > m.peakLiveCells;
            break;
        case GcPolicy::Mode::EveryN: collect = m.steps % gc.n == 0; break;
    }
    if (collect) {
        collectGarbage(cfg);
    }
    m.peakLiveCells = std::max<std::uint64_t>(m.peakLiveCells, cfg.heap.dynamicSize());
}

void collectExprBinders(const Expr& e, std::vector<Name>& out) { appendBinders(e, out); }

void checkDistinctNaming(const MachineConfig& cfg) {
    std::vector<Name> all = cfg.heap.names();
    for (CellId id : cfg.heap.ids()) {
        if (const Expr* e = cfg.heap.cell(id).bound()) {
            collectExprBinders(*e, all);
        }
    }
    collectExprBinders(cfg.control, all);
    for (const auto& f : cfg.stack) {
        if (const auto* c = std::get_if<CaseCont>(&f)) {
            const auto& cs = *c->node->as<Case>();
            for (const auto& alt : cs.alts) {
                all.insert(all.end(), alt.binders.begin(), alt.binders.end());
                collectExprBinders(alt.body, all);
            }
            if (cs.fallback) {
                collectExprBinders(cs.fallback, all);
            }
        } else if (const auto* s = std::get_if<SeqCont>(&f)) {
            collectExprBinders(s->then, all);
        }
    }
    std::unordered_set<Name, NameHash> seen;
    for (const auto& n : all) {
        if (!seen.insert(n).second) {
            throw std::logic_error("distinct naming violated at step " + std::to_string(cfg.metrics.steps) +
                                   ": " + n.render());
        }
    }
    std::unordered_set<Name, NameHash> targets;
    for (const auto& f : cfg.stack) {
        if (const auto* u = std::get_if<UpdateInto>(&f); u && !targets.insert(u->target).second) {
            throw std::logic_error("two pending updates of " + u->target.render());
        }
    }
}

}  // namespace

MachineConfig initConfig(const Program& program, const MachineOptions& options, std::uint64_t seedOffset) {
    if (program.find(program.mainName) == nullptr) {
        throw ProgramError(ProgramError::Kind::MissingMain, program.mainName.render() + " is not defined");
    }
    MachineConfig cfg{Heap{}, core::var(program.mainName), {}, NameSupply(program.nextUniq + seedOffset), {},
                      options};
    for (const auto& b : program.topLevel) {
        if (cfg.heap.contains(b.name)) {
            throw ProgramError(ProgramError::Kind::DuplicateName, b.name.render());
        }
        cfg.heap.allocate(Cell{b.name, Bound{b.rhs}, 0, true, std::nullopt});
    }
    return cfg;
}

MachineConfig configFor(Heap heap, Expr control, NameSupply supply, const MachineOptions& options) {
    heap.markAllInitial();
    return MachineConfig{std::move(heap), std::move(control), {}, supply, {}, options};
}

std::optional<Rule> step(MachineConfig& cfg) {
    if (cfg.terminated()) {
        return std::nullopt;
    }
    const auto& budget = cfg.options.budget;
    if (budget.maxSteps != 0 && cfg.metrics.steps >= budget.maxSteps) {
        fail(EvalError::Kind::BudgetExceeded, "step budget of " + std::to_string(budget.maxSteps));
    }
    Rule r = Stepper(cfg).fire();
    ++cfg.metrics.steps;
    sampleAfterStep(cfg);
    if (cfg.options.checkInvariants && cfg.options.varHat) {
        checkDistinctNaming(cfg);
    }
    return r;
}

void run(MachineConfig& cfg, const StepObserver& onStep) {
    while (auto r = step(cfg)) {
        if (onStep) {
            onStep(cfg, *r);
        }
    }
    if (cfg.options.gc.mode != GcPolicy::Mode::Off) {
        collectGarbage(cfg);
    }
    cfg.metrics.finalLiveCells = cfg.heap.dynamicSize();
}

EvalResult eval(const Program& program, const MachineOptions& options, const StepObserver& onStep,
                std::uint64_t seedOffset) {
    MachineConfig cfg = initConfig(program, options, seedOffset);
    run(cfg, onStep);
    return EvalResult{std::move(cfg.heap), std::move(cfg.control), cfg.metrics, cfg.supply.peek()};
}

std::string Observable::render() const {
    switch (kind) {
        case Kind::Int: return std::to_string(value);
        case Kind::Fun: return "<fun>";
        case Kind::Opaque: return "...";
        case Kind::Con: {
            if (fields.empty()) {
                return tag;
            }
            std::string out = tag + "(";
            for (std::size_t i = 0; i < fields.size(); ++i) {
                out += (i == 0 ? "" : ", ") + fields[i].render();
            }
            return out + ")";
        }
    }
    return "?";
}

namespace {

class Observer {
public:
    Observer(const Heap& heap, const MachineOptions& options, std::uint64_t supplyStart)
        : cfg_(configFor(heap, core::lit(0), NameSupply(supplyStart), options)) {
        cfg_.options.gc = GcPolicy::off();
    }

    Observable go(const Expr& v, int depth) {
        Observable o;
        if (const auto* lit = v->as<Lit>()) {
            o.kind = Observable::Kind::Int;
            o.value = lit->value;
        } else if (v->is<Lam>()) {
            o.kind = Observable::Kind::Fun;
        } else if (const auto* con = v->as<Con>()) {
            if (depth <= 0) {
                return o;
            }
            o.kind = Observable::Kind::Con;
            o.tag = con->tag;
            for (const auto& a : con->args) {
                o.fields.push_back(go(force(a), depth - 1));
            }
        }
        return o;
    }

private:
    Expr force(const Name& n) {
        cfg_.control = core::var(n);
        cfg_.stack.clear();
        while (step(cfg_)) {
        }
        return cfg_.control;
    }

    MachineConfig cfg_;
};

void noteUniq(const Name& n, std::uint64_t& top) { top = std::max(top, n.uniq); }

void scanUniqs(const Expr& e, std::uint64_t& top) {
    std::vector<Name> ns;
    appendBinders(e, ns);
    appendFreeVars(e, ns);
    for (const auto& n : ns) {
        noteUniq(n, top);
    }
}

}  // namespace

std::uint64_t supplyAbove(const Heap& heap, const Expr& extra) {
    std::uint64_t top = 0;
    for (CellId id : heap.ids()) {
        const Cell& c = heap.cell(id);
        noteUniq(c.name, top);
        if (const Expr* e = c.bound()) {
            scanUniqs(*e, top);
        }
    }
    if (extra) {
        scanUniqs(extra, top);
    }
    return top + 1;
}

Observable observe(const Expr& value, const Heap& heap, int depth, const MachineOptions& options,
                   std::uint64_t supplyStart) {
    if (supplyStart == 0) {
        supplyStart = supplyAbove(heap, value);
    }
    return Observer(heap, options, supplyStart).go(value, depth);
}

Observable observe(const EvalResult& result, int depth, const MachineOptions& options) {
    return observe(result.value, result.heap, depth, options, result.nextUniq);
}

}  // namespace lazevm
