#pragma once

#include <string>
#include <vector>

#include "lazevm/analysis.hpp"
#include "lazevm/heap.hpp"
#include "lazevm/machine.hpp"

namespace lazevm {

// fv(control) plus every name a pending frame refers to, including
// UpdateInto targets. Uses fv, not ufv: a deepDup wrapper keeps its
// argument alive.
NameSet rootSet(const MachineConfig& cfg);

// The cells transitively reachable from `roots` under fv, bindings
// unchanged. Throws std::invalid_argument on a root the heap lacks.
Heap collect(const Heap& heap, const NameSet& roots);

struct UrResult {
    NameSet reached;
    // Members of `reached` with no binding; they are treated as leaves.
    NameSet missing;
};

// Least solution of ur(e) = ufv e ∪ ⋃_{x ∈ ufv e} ur(Γ x). Blackholed
// cells are leaves.
UrResult unguardedReachable(const Heap& heap, const Expr& e);

// Names reachable from fv(e) under fv of bindings, e's own free names included.
NameSet reachableNames(const Heap& heap, const Expr& e);

struct TracePoint {
    Rule rule;
    MachineConfig cfg;
};

// A recording observer: keeps the configurations after every Var-enter and
// Var-leave step, plus the final one.
class LemmaTrace {
public:
    explicit LemmaTrace(const MachineConfig& start);

    StepObserver observer();
    void finish(const MachineConfig& finalCfg);

    const std::vector<TracePoint>& points() const { return points_; }

private:
    std::vector<TracePoint> points_;
};

struct LemmaReport {
    // The whole run's precondition U ∩ ur_Γ(e) = ∅ failed.
    bool skipped = false;
    bool a = true;
    bool b = true;
    bool c = true;
    // Completed sub-evaluations (thunk entry to its update) examined in
    // addition to the whole run, and those whose own precondition failed.
    std::size_t subChecked = 0;
    std::size_t subSkipped = 0;
    std::string counterexample;

    bool passed() const { return skipped || (a && b && c); }
};

// The deepDup lemma on a concrete run. trace.front() is the start (Γ : e),
// trace.back() the terminated configuration (Δ : z). Blackholed cells count
// as absent from a heap, as in the Var rule.
LemmaReport checkLemmaInstance(const Heap& gamma0, const std::vector<TracePoint>& trace);

struct IsolationReport {
    // z had free variables, so the statement says nothing.
    bool skipped = false;
    // Every Γ0 binding present and unchanged in Δ.
    bool preserved = true;
    // No Γ0 cell entered (blackholed) or updated during the run.
    bool untouched = true;
    // collect(Δ, fv(z)) and collect(Δ, fv(z) ∪ dom Γ0) hold no new cell.
    bool newCellsFreed = true;
    std::string detail;
    EvalResult result;

    bool passed() const { return skipped || (preserved && untouched && newCellsFreed); }
};

// Runs `e` over the initial heap `gamma0` and checks the conclusion Γ0 ⊆ Δ
// for closed results. Does not check that e has the required shape.
IsolationReport checkIsolation(const Heap& gamma0, const Expr& e, const MachineOptions& options = {});

}  // namespace lazevm
