#include <doctest.h>

#include <algorithm>
#include <map>

#include "lazevm/analysis.hpp"
#include "lazevm/bench.hpp"
#include "lazevm/errors.hpp"
#include "lazevm/gc.hpp"
#include "lazevm/machine.hpp"
#include "lazevm/pretty.hpp"
#include "lazevm/surface.hpp"
#include "support/gen.hpp"

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

MachineConfig machine(Heap h, const char* control, std::uint64_t next = 100, MachineOptions o = {}) {
    return configFor(std::move(h), readCoreExpr(control), NameSupply(next), o);
}

EvalError::Kind errorKind(MachineConfig cfg) {
    try {
        run(cfg);
    } catch (const EvalError& e) {
        return e.kind();
    }
    FAIL("expected an evaluation error");
    return EvalError::Kind::UnboundName;
}

std::uint64_t countRule(const Program& p, Rule r) {
    std::uint64_t n = 0;
    eval(p, {}, [&](const MachineConfig&, Rule fired) { n += fired == r ? 1 : 0; });
    return n;
}

const Expr& boundOf(const Heap& h, const char* n) {
    const Cell* c = h.find(nm(n));
    REQUIRE(c != nullptr);
    REQUIRE(c->bound() != nullptr);
    return *c->bound();
}

}  // namespace

TEST_SUITE("machine") {
    TEST_CASE("a lambda is already a value") {
        MachineConfig cfg = machine({}, "\\x#1 -> x#1");
        CHECK(cfg.terminated());
        CHECK_FALSE(step(cfg).has_value());
        CHECK(cfg.heap.size() == 0);
        CHECK(cfg.metrics.steps == 0);
    }

    TEST_CASE("variable lookup returns a renamed copy and leaves the binding alone") {
        MachineConfig cfg = machine(heapOf({{"x#1", "\\y#2 -> y#2"}}), "x#1");
        Expr before = boundOf(cfg.heap, "x#1");
        run(cfg);
        CHECK(alphaEquivalent(cfg.control, readCoreExpr("\\y#2 -> y#2")));
        REQUIRE(cfg.control->is<Lam>());
        CHECK(cfg.control->as<Lam>()->binder.uniq >= 100);
        CHECK(syntacticallyEqual(boundOf(cfg.heap, "x#1"), before));

        MachineOptions plain;
        plain.varHat = false;
        MachineConfig raw = machine(heapOf({{"x#1", "\\y#2 -> y#2"}}), "x#1", 100, plain);
        run(raw);
        CHECK(pretty(raw.control) == "\\y#2 -> y#2");
    }

    TEST_CASE("initial configuration from a program") {
        Program p = compileSource("main = \\x -> x;");
        MachineConfig cfg = initConfig(p);
        CHECK(cfg.heap.size() == 1);
        CHECK(cfg.heap.contains(p.mainName));
        CHECK(cfg.control->is<Var>());
        CHECK(cfg.stack.empty());
        CHECK(cfg.metrics == Metrics{});

        Program empty;
        empty.mainName = nm("main#1");
        empty.nextUniq = 2;
        CHECK_THROWS_AS(initConfig(empty), ProgramError);

        Program fig = buildBenchProgram(Strategy::Original, Scenario::NoSharing, BenchParams{});
        MachineConfig f = initConfig(fig);
        std::vector<Name> declared;
        for (const auto& b : fig.topLevel) {
            declared.push_back(b.name);
        }
        std::sort(declared.begin(), declared.end());
        CHECK(f.heap.names() == declared);
    }

    TEST_CASE("evaluation errors") {
        CHECK(errorKind(machine(heapOf({{"x#1", "x#1"}}), "x#1")) == EvalError::Kind::BlackholeEntered);
        CHECK(errorKind(machine({}, "y#5")) == EvalError::Kind::UnboundName);
        CHECK(errorKind(machine(heapOf({{"a#1", "False"}}), "case a#1 of { True -> 1 }")) ==
              EvalError::Kind::NoMatchingAlternative);
        CHECK(errorKind(machine(heapOf({{"a#1", "\\y#2 -> y#2"}}), "a#1 + a#1")) ==
              EvalError::Kind::PrimTypeMismatch);
        CHECK(errorKind(machine({}, "let { x#1 = dup x#1 } in x#1")) == EvalError::Kind::DupOfBlackhole);
        CHECK(errorKind(machine({}, "let { x#1 = deepDup x#1 } in x#1")) == EvalError::Kind::DupOfBlackhole);

        MachineOptions tight;
        tight.budget.maxSteps = 50;
        Program loop = compileSource("f x = f (x + 1); main = f 0;");
        CHECK_THROWS_AS(eval(loop, tight), EvalError);
        MachineOptions cells;
        cells.budget.maxCells = 20;
        try {
            eval(loop, cells);
            FAIL("no error");
        } catch (const EvalError& e) {
            CHECK(e.kind() == EvalError::Kind::BudgetExceeded);
        }
    }

    TEST_CASE("dup of a thunk repeats its work") {
        Program shared = compileSource("main = let { t = 1 + 1 } in t + t;");
        Program copied = compileSource("main = let { t = 1 + 1 } in let { a = dup t } in a + t;");
        CHECK(observe(eval(shared), 2).render() == "4");
        EvalResult r = eval(copied);
        CHECK(observe(r, 2).render() == "4");
        CHECK(r.metrics.dupCopies == 1);
        // Every addition fires the same number of Prim steps: two additions
        // when shared, three when the thunk is copied.
        CHECK(2 * countRule(copied, Rule::Prim) == 3 * countRule(shared, Rule::Prim));
    }

    TEST_CASE("dup of a value copies it without touching the source") {
        MachineConfig cfg = machine(heapOf({{"t#1", "\\y#2 -> y#2"}}), "dup t#1");
        Expr before = boundOf(cfg.heap, "t#1");
        CHECK(step(cfg) == Rule::Dup);
        CHECK(cfg.metrics.dupCopies == 1);
        CHECK(cfg.metrics.allocations == 1);
        REQUIRE(cfg.control->is<Var>());
        const Cell* copy = cfg.heap.find(cfg.control->as<Var>()->name);
        REQUIRE(copy != nullptr);
        CHECK(copy->copyOf == nm("t#1"));
        CHECK(alphaEquivalent(*copy->bound(), before));
        CHECK_FALSE(syntacticallyEqual(*copy->bound(), before));
        run(cfg);
        CHECK(boundOf(cfg.heap, "t#1").get() == before.get());
    }

    TEST_CASE("dup of an evaluated constructor shares its fields") {
        MachineConfig cfg =
            machine(heapOf({{"h#1", "a#4 + a#4"}, {"a#4", "1"}, {"r#2", "Nil"}, {"t#3", "Cons h#1 r#2"}}), "dup t#3");
        step(cfg);
        const Cell* copy = cfg.heap.find(cfg.control->as<Var>()->name);
        REQUIRE(copy != nullptr);
        CHECK(pretty(*copy->bound()) == "Cons h#1 r#2");
        CHECK(cfg.metrics.allocations == 1);
    }

    TEST_CASE("deepDup of a constructor wraps each field") {
        MachineConfig cfg = machine(heapOf({{"h#1", "1"}, {"t#2", "Nil"}, {"x#3", "Cons h#1 t#2"}}), "deepDup x#3");
        CHECK(step(cfg) == Rule::Deep);
        CHECK(cfg.metrics.allocations == 3);
        CHECK(cfg.metrics.deepDupThunks == 2);
        const Cell* copy = cfg.heap.find(cfg.control->as<Var>()->name);
        REQUIRE(copy != nullptr);
        const Con* c = (*copy->bound())->as<Con>();
        REQUIRE(c != nullptr);
        REQUIRE(c->args.size() == 2);
        CHECK(pretty(boundOf(cfg.heap, c->args[0].render().c_str())) == "deepDup h#1");
        CHECK(pretty(boundOf(cfg.heap, c->args[1].render().c_str())) == "deepDup t#2");
    }

    TEST_CASE("deepDup of a wrapper is not wrapped again") {
        MachineConfig cfg = machine(heapOf({{"y#1", "5"}, {"x#2", "deepDup y#1"}}), "deepDup x#2");
        step(cfg);
        CHECK(cfg.metrics.allocations == 1);
        CHECK(cfg.metrics.deepDupThunks == 0);
        CHECK(pretty(boundOf(cfg.heap, cfg.control->as<Var>()->name.render().c_str())) == "deepDup y#1");
        run(cfg);
        CHECK(pretty(cfg.control) == "5");

        MachineConfig lit = machine(heapOf({{"x#1", "5"}}), "deepDup x#1");
        run(lit);
        CHECK(lit.metrics.allocations == 1);
        CHECK(pretty(lit.control) == "5");
    }

    TEST_CASE("sharing and copying of an arithmetic thunk") {
        Program shared = compileSource("main = let { x = 1 + 1 } in x + x;");
        Program copied = compileSource("main = let { x = 1 + 1 } in (dup x) + x;");
        EvalResult s = eval(shared);
        CHECK(observe(s, 1).render() == "4");
        CHECK(observe(eval(copied), 1).render() == "4");
        CHECK(2 * countRule(copied, Rule::Prim) == 3 * countRule(shared, Rule::Prim));
    }

    TEST_CASE("deepDup leaves the original heap unevaluated") {
        Heap g = heapOf({{"a#1", "1"}, {"x#2", "a#1 + a#1"}});
        Expr before = boundOf(g, "x#2");
        Expr e = readCoreExpr("let { x#3 = deepDup x#2; z#4 = 0 } in x#3 + z#4");
        MachineConfig cfg = configFor(g, e, NameSupply(10));
        run(cfg);
        CHECK(pretty(cfg.control) == "2");
        CHECK(boundOf(cfg.heap, "x#2").get() == before.get());
        IsolationReport rep = checkIsolation(g, e);
        CHECK(rep.passed());
        CHECK_FALSE(rep.skipped);
    }

    TEST_CASE("observation") {
        CHECK(observe(eval(compileSource("data Cons/2; data Nil/0; main = Cons 1 Nil;")), 2).render() ==
              "Cons(1, Nil)");
        CHECK(observe(eval(compileSource("main = \\x -> x;")), 2).render() == "<fun>");
        Program nats = compileSource(
            "data Cons/2; data Nil/0; from n = Cons n (from (n + 1)); main = from 0;");
        CHECK(observe(eval(nats), 3).render() == "Cons(0, Cons(1, Cons(2, ...)))");
    }

    TEST_CASE("property: generated runs keep names distinct, update once and count monotonically") {
        Generator g(21);
        GenOptions go;
        go.dupChance = 0.25;
        for (int i = 0; i < 150; ++i) {
            Program p = desugar(g.program(go));
            MachineOptions o;
            o.checkInvariants = true;
            MachineConfig cfg = initConfig(p, o);
            const std::size_t initial = cfg.heap.size();
            std::map<Name, int> entered;
            Metrics prev;
            Expr prevControl = cfg.control;
            Heap prevHeap = cfg.heap;
            bool ok = true;
            run(cfg, [&](const MachineConfig& c, Rule r) {
                const Metrics& m = c.metrics;
                ok = ok && m.steps == prev.steps + 1 && m.allocations >= prev.allocations &&
                     m.thunkUpdates >= prev.thunkUpdates && m.dupCopies >= prev.dupCopies &&
                     m.deepDupThunks >= prev.deepDupThunks;
                if (r == Rule::VarEnter) {
                    for (CellId id : c.heap.ids()) {
                        const Cell& cell = c.heap.cell(id);
                        const Cell* old = prevHeap.find(cell.name);
                        if (cell.isBlackhole() && old != nullptr && !old->isBlackhole()) {
                            ok = ok && ++entered[cell.name] == 1;
                        }
                    }
                }
                if (r == Rule::Deep) {
                    const Name& src = prevControl->as<DeepDup>()->name;
                    std::size_t want = 1 + unguardedFreeVars(*prevHeap.find(src)->bound()).size();
                    ok = ok && m.allocations - prev.allocations == want &&
                         m.deepDupThunks - prev.deepDupThunks == want - 1;
                }
                if (r == Rule::Dup) {
                    const Name& src = prevControl->as<Dup>()->name;
                    ok = ok && c.heap.find(src)->bound()->get() == prevHeap.find(src)->bound()->get();
                }
                prev = m;
                prevControl = c.control;
                prevHeap = c.heap;
            });
            CHECK(ok);
            CHECK(cfg.metrics.thunkUpdates <= cfg.metrics.allocations + initial);
            CHECK(cfg.metrics.peakLiveCells >= cfg.metrics.finalLiveCells);
        }
    }

    TEST_CASE("property: turning off value renaming does not change the observable") {
        Generator g(22);
        MachineOptions plain;
        plain.varHat = false;
        for (int i = 0; i < 200; ++i) {
            Program p = desugar(g.program());
            CHECK(observe(eval(p), 8) == observe(eval(p, plain), 8, plain));
        }
    }
}
