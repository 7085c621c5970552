#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lazevm/errors.hpp"
#include "lazevm/expr.hpp"
#include "lazevm/heap.hpp"
#include "lazevm/metrics.hpp"

namespace lazevm {

struct ApplyTo {
    Name arg;
};
struct UpdateInto {
    Name target;
    CellId cell;
};
// `node` is the Case expression whose scrutinee is being evaluated.
struct CaseCont {
    Expr node;
    // Free names of the alternatives, filled on first use by the collector.
    mutable std::shared_ptr<const std::vector<Name>> fvCache;
};
struct PrimLeft {
    PrimOp op;
    Name rhs;
};
struct PrimRight {
    PrimOp op;
    std::int64_t lhsValue;
};
struct SeqCont {
    Expr then;
    mutable std::shared_ptr<const std::vector<Name>> fvCache;
};
using Frame = std::variant<ApplyTo, UpdateInto, CaseCont, PrimLeft, PrimRight, SeqCont>;

// Names a frame will dereference once it is resumed.
const std::vector<Name>& frameNames(const Frame& f, std::vector<Name>& scratch);

enum class Rule { Lam, App, VarEnter, VarLeave, Let, Dup, Deep, Con, Case, Prim, Seq };

std::string_view ruleName(Rule r);

struct Budget {
    std::uint64_t maxSteps = 0;  // 0: unlimited
    std::uint64_t maxCells = 0;  // cap on allocations; 0: unlimited
};

struct MachineOptions {
    Budget budget;
    GcPolicy gc = GcPolicy::off();
    // Rename bound variables of a value returned through a variable.
    bool varHat = true;
    // Collect on every step even when the heap is no larger than the
    // recorded peak. Produces identical metrics; only useful for checking that.
    bool strictEveryStep = false;
    // Assert distinct naming after every step. Slow.
    bool checkInvariants = false;
};

struct MachineConfig {
    Heap heap;
    Expr control;
    std::vector<Frame> stack;
    NameSupply supply;
    Metrics metrics;
    MachineOptions options;

    bool terminated() const { return stack.empty() && isValue(control); }
};

// Loads the top-level bindings as the initial heap with control `main`.
// Runtime names start at program.nextUniq + seedOffset.
MachineConfig initConfig(const Program& program, const MachineOptions& options = {},
                         std::uint64_t seedOffset = 0);

// A machine over an explicit heap; all of its cells count as initial.
MachineConfig configFor(Heap heap, Expr control, NameSupply supply, const MachineOptions& options = {});

// Fires exactly one rule, mutating `cfg`; nullopt when already terminated.
std::optional<Rule> step(MachineConfig& cfg);

using StepObserver = std::function<void(const MachineConfig&, Rule)>;

// Steps to termination, then samples the final live size.
void run(MachineConfig& cfg, const StepObserver& onStep = nullptr);

struct EvalResult {
    Heap heap;
    Expr value;
    Metrics metrics;
    // First uniq the run did not hand out.
    std::uint64_t nextUniq = 0;
};

EvalResult eval(const Program& program, const MachineOptions& options = {},
                const StepObserver& onStep = nullptr, std::uint64_t seedOffset = 0);

struct Observable {
    enum class Kind { Int, Con, Fun, Opaque };

    Kind kind = Kind::Opaque;
    std::int64_t value = 0;
    std::string tag;
    std::vector<Observable> fields;

    // `3`, `Nil`, `Cons(1, Nil)`, `<fun>`, `...`.
    std::string render() const;

    friend bool operator==(const Observable&, const Observable&) = default;
};

// Forces constructor fields down to `depth` levels on a copy of `heap`,
// without collection. A zero supplyStart means supplyAbove(heap, value).
Observable observe(const Expr& value, const Heap& heap, int depth, const MachineOptions& options = {},
                   std::uint64_t supplyStart = 0);
Observable observe(const EvalResult& result, int depth, const MachineOptions& options = {});

// One more than every uniq occurring in `heap` or `extra`.
std::uint64_t supplyAbove(const Heap& heap, const Expr& extra = nullptr);

}  // namespace lazevm
