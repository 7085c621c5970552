#include <doctest.h>

#include <algorithm>

#include "lazevm/analysis.hpp"
#include "lazevm/bench.hpp"
#include "lazevm/gc.hpp"
#include "lazevm/machine.hpp"
#include "lazevm/pretty.hpp"
#include "lazevm/surface.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace lazevm;
using namespace lazevm::testing;

namespace {

Name nm(const char* r) { return *Name::parse(r); }

Heap heapOf(std::initializer_list<std::pair<const char*, const char*>> bindings) {
    Heap h;
    for (const auto& [n, e] : bindings) {
        h.allocate(Cell{nm(n), Bound{readCoreExpr(e)}, 0, true, std::nullopt});
    }
    return h;
}

NameSet names(std::initializer_list<const char*> rendered) {
    NameSet out;
    for (const char* r : rendered) {
        out.insert(nm(r));
    }
    return out;
}

NameSet domain(const Heap& h) {
    auto v = h.names();
    return {v.begin(), v.end()};
}

bool subset(const NameSet& a, const NameSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

// Names reachable from fv(e) under fv of bindings; unbound names kept as leaves.
NameSet fvReach(const Heap& h, const Expr& e) {
    std::set<Name> start = fvOracle(e);
    NameSet out;
    std::vector<Name> work(start.begin(), start.end());
    while (!work.empty()) {
        Name n = work.back();
        work.pop_back();
        if (!out.insert(n).second) {
            continue;
        }
        if (const Cell* c = h.find(n); c != nullptr && c->bound() != nullptr) {
            for (const auto& m : fvOracle(*c->bound())) {
                work.push_back(m);
            }
        }
    }
    return out;
}

LemmaReport lemmaOn(const Heap& g, const Expr& e) {
    MachineConfig cfg = configFor(g, e, NameSupply(supplyAbove(g, e)));
    LemmaTrace trace(cfg);
    run(cfg, trace.observer());
    trace.finish(cfg);
    return checkLemmaInstance(g, trace.points());
}

}  // namespace

TEST_SUITE("gc") {
    TEST_CASE("roots come from the control and the stack") {
        MachineConfig a = configFor({}, readCoreExpr("x#1 y#2"), NameSupply(10));
        CHECK(rootSet(a) == names({"x#1", "y#2"}));

        MachineConfig b = configFor({}, readCoreExpr("\\v#3 -> w#4"), NameSupply(10));
        b.stack.push_back(ApplyTo{nm("a#5")});
        b.stack.push_back(UpdateInto{nm("t#6"), 0});
        CHECK(rootSet(b) == names({"w#4", "a#5", "t#6"}));

        MachineConfig c = configFor({}, readCoreExpr("deepDup x#1"), NameSupply(10));
        CHECK(rootSet(c) == names({"x#1"}));
    }

    TEST_CASE("collection keeps what the roots reach") {
        Heap h = heapOf({{"a#1", "1"}, {"b#2", "2"}});
        CHECK(domain(collect(h, names({"a#1"}))) == names({"a#1"}));
        Heap cyc = heapOf({{"a#1", "b#2"}, {"b#2", "a#1"}, {"c#3", "a#1"}});
        CHECK(domain(collect(cyc, names({"a#1"}))) == names({"a#1", "b#2"}));
        CHECK_THROWS_AS(collect(h, names({"z#9"})), std::invalid_argument);
        Heap kept = collect(cyc, names({"c#3"}));
        CHECK(pretty(*kept.find(nm("c#3"))->bound()) == "a#1");
    }

    TEST_CASE("rejected subtrees become garbage while solve runs") {
        Program p = buildBenchProgram(Strategy::Original, Scenario::NoSharing, BenchParams{2, 2, 8, 0});
        MachineConfig cfg = initConfig(p);
        std::size_t maxGarbage = 0;
        run(cfg, [&](const MachineConfig& c, Rule r) {
            if (r != Rule::VarLeave) {
                return;
            }
            Heap live = collect(c.heap, rootSet(c));
            maxGarbage = std::max(maxGarbage, c.heap.size() - live.size());
        });
        CHECK(maxGarbage > 0);
        Program q = buildBenchProgram(Strategy::Original, Scenario::NoSharing, BenchParams{2, 2, 8, 0});
        EvalResult off = eval(q);
        MachineOptions on;
        on.gc = GcPolicy::everyStep();
        EvalResult gc = eval(q, on);
        CHECK(gc.metrics.peakLiveCells < off.metrics.peakLiveCells);
        CHECK(off.metrics.peakLiveCells == off.metrics.allocations);
    }

    TEST_CASE("unguarded reachability") {
        Heap h = heapOf({{"x#1", "y#2"}, {"y#2", "\\z#3 -> z#3"}});
        CHECK(unguardedReachable(h, readCoreExpr("x#1")).reached == names({"x#1", "y#2"}));
        Heap g = heapOf({{"x#1", "deepDup y#2"}, {"y#2", "Cons a#3 a#3"}, {"a#3", "1"}});
        CHECK(unguardedReachable(g, readCoreExpr("x#1")).reached == names({"x#1"}));
        CHECK(unguardedReachable(g, readCoreExpr("\\x#4 -> x#4")).reached.empty());
        UrResult m = unguardedReachable(h, readCoreExpr("q#9 x#1"));
        CHECK(m.missing == names({"q#9"}));
        CHECK(m.reached == names({"q#9", "x#1", "y#2"}));
    }

    TEST_CASE("property: ur matches the closure oracle and lies inside fv reachability") {
        Generator g(31);
        int strict = 0;
        for (int i = 0; i < 500; ++i) {
            UrInstance inst = g.urInstance(12, i % 2 == 0);
            UrResult ur = unguardedReachable(inst.heap, inst.e);
            std::set<Name> want = urOracle(inst.heap, inst.e);
            CHECK(std::set<Name>(ur.reached.begin(), ur.reached.end()) == want);
            NameSet fvr = fvReach(inst.heap, inst.e);
            NameSet bound;
            for (const auto& n : fvr) {
                if (inst.heap.contains(n) || fvOracle(inst.e).contains(n)) {
                    bound.insert(n);
                }
            }
            CHECK(reachableNames(inst.heap, inst.e) == bound);
            CHECK(subset(ur.reached, fvr));
            if (!inst.hasDeepDupBinding && !containsDeepDup(inst.e)) {
                CHECK(ur.reached == fvr);
            } else if (ur.reached != fvr) {
                ++strict;
            }
        }
        CHECK(strict > 0);
    }

    TEST_CASE("property: ur is monotone in the unguarded free variables") {
        Generator g(32);
        for (int i = 0; i < 300; ++i) {
            UrInstance a = g.urInstance(12, i % 2 == 0);
            UrInstance b = g.urInstance(12);
            // e' = let u = a.e in seq u b.e has ufv a superset of ufv(a.e).
            Name u{"u", 100000};
            Expr wider = core::let({Binding{u, a.e}, Binding{Name{"w", 100001}, b.e}},
                                   core::seq(u, core::var(Name{"w", 100001})));
            NameSet ua = unguardedFreeVars(a.e);
            NameSet uw = unguardedFreeVars(wider);
            REQUIRE(subset(ua, uw));
            CHECK(subset(unguardedReachable(a.heap, a.e).reached, unguardedReachable(a.heap, wider).reached));
        }
    }

    TEST_CASE("property: collection is idempotent and monotone in its roots") {
        Generator g(33);
        for (int i = 0; i < 300; ++i) {
            UrInstance inst = g.urInstance(12);
            std::vector<Name> all = inst.heap.names();
            if (all.empty()) {
                continue;
            }
            NameSet small{all[i % all.size()]};
            NameSet big = small;
            big.insert(all[(i * 7 + 3) % all.size()]);
            Heap once = collect(inst.heap, small);
            Heap twice = collect(once, small);
            CHECK(once.sameBindings(twice));
            CHECK(subset(domain(once), domain(collect(inst.heap, big))));
        }
    }

    TEST_CASE("the deepDup lemma on the worked example and a vacuous case") {
        Heap g = heapOf({{"a#1", "1"}, {"x#2", "a#1 + a#1"}});
        LemmaReport r = lemmaOn(g, readCoreExpr("let { x#3 = deepDup x#2; z#4 = 0 } in x#3 + z#4"));
        CHECK_FALSE(r.skipped);
        CHECK(r.a);
        CHECK(r.b);
        CHECK(r.c);
        LemmaReport v = lemmaOn(g, readCoreExpr("let { z#4 = 0 } in x#2 + z#4"));
        CHECK(v.skipped);
    }

    TEST_CASE("property: the deepDup lemma and deep-copy isolation on generated instances") {
        Generator g(34);
        int applied = 0;
        for (int i = 0; i < 300; ++i) {
            IsolationInstance t = g.isolation();
            IsolationReport rep = checkIsolation(t.gamma0, t.e);
            CHECK_MESSAGE(rep.passed(), rep.detail);
            IsolationVerdict v = isolationOracle(t.gamma0, t.e, supplyAbove(t.gamma0, t.e));
            CHECK_MESSAGE(v.ok(), v.why);
            CHECK(v.open == rep.skipped);
            LemmaReport l = lemmaOn(t.gamma0, t.e);
            CHECK_MESSAGE(l.passed(), l.counterexample);
            applied += l.skipped ? 0 : 1;
        }
        CHECK(applied > 250);
    }

    TEST_CASE("a shared read of Γ0 is caught by the oracle and the checker") {
        Heap g = heapOf({{"a#1", "1"}, {"x#2", "a#1 + a#1"}});
        Expr e = readCoreExpr("let { y#3 = dup x#2 } in seq x#2 y#3");
        IsolationReport rep = checkIsolation(g, e);
        CHECK_FALSE(rep.untouched);
        CHECK_FALSE(isolationOracle(g, e, 10).ok());
    }

    TEST_CASE("property: collection never changes results or non-heap counters") {
        Generator gen(35);
        MachineOptions step;
        step.gc = GcPolicy::everyStep();
        MachineOptions ten;
        ten.gc = GcPolicy::everyN(10);
        MachineOptions strict = step;
        strict.strictEveryStep = true;
        for (int i = 0; i < 150; ++i) {
            Program p = desugar(gen.program());
            EvalResult off = eval(p);
            EvalResult s = eval(p, step);
            EvalResult t = eval(p, ten);
            Observable o = observe(off, 8);
            CHECK(observe(s, 8) == o);
            CHECK(observe(t, 8) == o);
            CHECK(sameNonGcCounters(off.metrics, s.metrics));
            CHECK(sameNonGcCounters(off.metrics, t.metrics));
            CHECK(s.metrics.peakLiveCells <= t.metrics.peakLiveCells);
            CHECK(t.metrics.peakLiveCells <= off.metrics.peakLiveCells);
            CHECK(eval(p, strict).metrics == s.metrics);
        }
        CHECK(GcPolicy::everyN(1) == GcPolicy::everyStep());
    }
}
