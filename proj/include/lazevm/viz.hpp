#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lazevm/heap.hpp"
#include "lazevm/machine.hpp"

namespace lazevm {

enum class CellKind { Thunk, ValueConstructor, ValueLambda, DeepDupWrapper, Blackhole };

// T, N, F, D, B.
char cellKindLetter(CellKind k);
CellKind classifyCell(const Cell& c);

struct SnapshotCell {
    Name name;
    CellKind kind = CellKind::Thunk;
    // Short rendering of a literal's value; empty otherwise.
    std::string literal;
    std::vector<Name> outEdges;
    std::optional<Name> dupCopyOf;
    bool initial = false;
};

struct HeapSnapshot {
    std::uint64_t stepIndex = 0;
    // In allocation order.
    std::vector<SnapshotCell> cells;
    // Sorted by uniq.
    std::vector<Name> roots;
};

HeapSnapshot takeSnapshot(const Heap& heap, const std::vector<Name>& roots, std::uint64_t stepIndex);
// Roots are those of the garbage collector.
HeapSnapshot takeSnapshot(const MachineConfig& cfg);

// Cells not reachable from the roots.
std::vector<Name> unreachableCells(const HeapSnapshot& s);

// A digraph with one node per cell, labelled by kind letter and name.
// Unreachable cells are grey; a dup or deepDup copy is joined to its source
// by a double line.
std::string exportDot(const HeapSnapshot& s);

}  // namespace lazevm
