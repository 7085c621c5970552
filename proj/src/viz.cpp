#include "lazevm/viz.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lazevm/analysis.hpp"
#include "lazevm/gc.hpp"

namespace lazevm {

char cellKindLetter(CellKind k) {
    switch (k) {
        case CellKind::Thunk: return 'T';
        case CellKind::ValueConstructor: return 'N';
        case CellKind::ValueLambda: return 'F';
        case CellKind::DeepDupWrapper: return 'D';
        case CellKind::Blackhole: return 'B';
    }
    return '?';
}

CellKind classifyCell(const Cell& c) {
    const Expr* e = c.bound();
    if (e == nullptr) {
        return CellKind::Blackhole;
    }
    const auto& node = (*e)->node;
    if (std::holds_alternative<DeepDup>(node)) {
        return CellKind::DeepDupWrapper;
    }
    if (std::holds_alternative<Lam>(node)) {
        return CellKind::ValueLambda;
    }
    if (std::holds_alternative<Con>(node) || std::holds_alternative<Lit>(node)) {
        return CellKind::ValueConstructor;
    }
    return CellKind::Thunk;
}

HeapSnapshot takeSnapshot(const Heap& heap, const std::vector<Name>& roots, std::uint64_t stepIndex) {
    HeapSnapshot s;
    s.stepIndex = stepIndex;
    s.roots = roots;
    std::sort(s.roots.begin(), s.roots.end(), [](const Name& a, const Name& b) { return a.uniq < b.uniq; });
    s.roots.erase(std::unique(s.roots.begin(), s.roots.end()), s.roots.end());
    for (CellId id : heap.ids()) {
        const Cell& c = heap.cell(id);
        SnapshotCell sc;
        sc.name = c.name;
        sc.kind = classifyCell(c);
        sc.dupCopyOf = c.copyOf;
        sc.initial = c.initial;
        if (const Expr* e = c.bound()) {
            if (const auto* lit = std::get_if<Lit>(&(*e)->node)) {
                sc.literal = std::to_string(lit->value);
            }
        }
        for (CellId to : heap.edges(id)) {
            sc.outEdges.push_back(heap.cell(to).name);
        }
        s.cells.push_back(std::move(sc));
    }
    return s;
}

HeapSnapshot takeSnapshot(const MachineConfig& cfg) {
    NameSet roots = rootSet(cfg);
    return takeSnapshot(cfg.heap, std::vector<Name>(roots.begin(), roots.end()), cfg.metrics.steps);
}

std::vector<Name> unreachableCells(const HeapSnapshot& s) {
    std::unordered_map<Name, const SnapshotCell*, NameHash> byName;
    for (const auto& c : s.cells) {
        byName.emplace(c.name, &c);
    }
    std::unordered_set<Name, NameHash> seen;
    std::vector<Name> work(s.roots.begin(), s.roots.end());
    while (!work.empty()) {
        Name n = std::move(work.back());
        work.pop_back();
        if (!seen.insert(n).second) {
            continue;
        }
        auto it = byName.find(n);
        if (it != byName.end()) {
            for (const auto& m : it->second->outEdges) {
                work.push_back(m);
            }
        }
    }
    std::vector<Name> out;
    for (const auto& c : s.cells) {
        if (!seen.contains(c.name)) {
            out.push_back(c.name);
        }
    }
    return out;
}

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '\\';
        }
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string exportDot(const HeapSnapshot& s) {
    std::unordered_set<Name, NameHash> grey;
    for (auto& n : unreachableCells(s)) {
        grey.insert(std::move(n));
    }
    std::unordered_set<Name, NameHash> cellNames;
    for (const auto& c : s.cells) {
        cellNames.insert(c.name);
    }
    std::ostringstream o;
    o << "digraph heap {\n";
    o << "  label=" << quoted("step " + std::to_string(s.stepIndex)) << ";\n";
    o << "  node [shape=circle, fontname=\"Helvetica\"];\n";
    o << "  roots [shape=point];\n";
    for (const auto& r : s.roots) {
        if (!cellNames.contains(r)) {
            o << "  " << quoted(r.render()) << " [shape=plaintext];\n";
        }
    }
    for (const auto& c : s.cells) {
        std::string label(1, cellKindLetter(c.kind));
        if (!c.literal.empty()) {
            label += " " + c.literal;
        }
        label += "\\n" + c.name.render();
        o << "  " << quoted(c.name.render()) << " [label=" << quoted(label);
        if (c.initial) {
            o << ", shape=box";
        }
        if (grey.contains(c.name)) {
            o << ", style=filled, fillcolor=grey80, color=grey50, fontcolor=grey40";
        }
        o << "];\n";
    }
    for (const auto& r : s.roots) {
        o << "  roots -> " << quoted(r.render()) << ";\n";
    }
    for (const auto& c : s.cells) {
        for (const auto& to : c.outEdges) {
            o << "  " << quoted(c.name.render()) << " -> " << quoted(to.render());
            if (grey.contains(c.name)) {
                o << " [color=grey50]";
            }
            o << ";\n";
        }
        if (c.dupCopyOf && cellNames.contains(*c.dupCopyOf)) {
            o << "  " << quoted(c.name.render()) << " -> " << quoted(c.dupCopyOf->render())
              << " [color=\"black:invis:black\", arrowhead=none, constraint=false];\n";
        }
    }
    o << "}\n";
    return o.str();
}

}  // namespace lazevm
