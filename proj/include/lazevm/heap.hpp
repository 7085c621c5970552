#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lazevm/expr.hpp"
#include "lazevm/name.hpp"

namespace lazevm {

struct Bound {
    Expr expr;
};
// The binding is being evaluated; `owner` is the step that entered it.
struct Blackhole {
    std::uint64_t owner;
};
using HeapBinding = std::variant<Bound, Blackhole>;

struct Cell {
    Name name;
    HeapBinding binding;
    std::uint64_t createdAt = 0;
    // Loaded before evaluation began; not counted as a runtime allocation.
    bool initial = false;
    // Source binding when this cell was allocated by dup or deepDup.
    std::optional<Name> copyOf;

    const Expr* bound() const {
        const auto* b = std::get_if<Bound>(&binding);
        return b ? &b->expr : nullptr;
    }
    bool isBlackhole() const { return std::holds_alternative<Blackhole>(binding); }
};

using CellId = std::uint32_t;

// Name-indexed cells. Ids are dense and never reused, so iteration in id
// order is allocation order.
class Heap {
public:
    // The name must not already be bound.
    CellId allocate(Cell cell);

    std::optional<CellId> lookup(const Name& n) const;
    const Cell* find(const Name& n) const;
    bool contains(const Name& n) const { return index_.contains(n); }

    const Cell& cell(CellId id) const { return slots_[id].cell; }
    void setBinding(CellId id, HeapBinding b);
    void remove(CellId id);

    std::size_t size() const { return live_.size(); }
    // Resident cells that were not loaded initially.
    std::size_t dynamicSize() const { return live_.size() - initialLive_; }

    // Live ids in allocation order.
    const std::vector<CellId>& ids() const { return live_; }
    std::vector<Name> names() const;

    // Successors under fv of the bound expression; empty for a blackhole.
    // Free names that are not bound here are dropped.
    const std::vector<CellId>& edges(CellId id) const;

    // Ids reachable from `roots` in discovery order; roots absent from the
    // heap are appended to `missing` when given.
    std::vector<CellId> reachable(const std::vector<Name>& roots, std::vector<Name>* missing = nullptr) const;

    // Flags every resident cell as initial, so dynamicSize() restarts at zero.
    void markAllInitial();

    // Drops every cell not reachable from `roots`; returns the number removed.
    std::size_t retainReachable(const std::vector<Name>& roots);

    // Same names bound to syntactically equal expressions (blackholes equal
    // when both are blackholes).
    bool sameBindings(const Heap& other) const;

private:
    struct Slot {
        Cell cell;
        bool live = false;
        mutable bool edgesValid = false;
        mutable std::uint32_t mark = 0;
        mutable std::vector<CellId> edges;
    };

    std::uint32_t nextEpoch() const;

    std::vector<Slot> slots_;
    std::vector<CellId> live_;
    std::size_t initialLive_ = 0;
    std::unordered_map<Name, CellId, NameHash> index_;
    mutable std::uint32_t epoch_ = 0;
};

}  // namespace lazevm
