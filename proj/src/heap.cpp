#include "lazevm/heap.hpp"

#include <algorithm>
#include <stdexcept>

#include "lazevm/analysis.hpp"

namespace lazevm {

CellId Heap::allocate(Cell cell) {
    auto id = static_cast<CellId>(slots_.size());
    auto [it, inserted] = index_.emplace(cell.name, id);
    if (!inserted) {
        throw std::logic_error("heap: " + cell.name.render() + " already bound");
    }
    if (cell.initial) {
        ++initialLive_;
    }
    Slot slot;
    slot.cell = std::move(cell);
    slot.live = true;
    slots_.push_back(std::move(slot));
    live_.push_back(id);
    return id;
}

std::optional<CellId> Heap::lookup(const Name& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const Cell* Heap::find(const Name& n) const {
    auto id = lookup(n);
    return id ? &slots_[*id].cell : nullptr;
}

void Heap::setBinding(CellId id, HeapBinding b) {
    Slot& s = slots_[id];
    s.cell.binding = std::move(b);
    s.edgesValid = false;
    s.edges.clear();
}

void Heap::remove(CellId id) {
    Slot& s = slots_[id];
    if (!s.live) {
        return;
    }
    for (CellId other : live_) {
        if (slots_[other].edgesValid &&
            std::binary_search(slots_[other].edges.begin(), slots_[other].edges.end(), id)) {
            slots_[other].edgesValid = false;
        }
    }
    live_.erase(std::find(live_.begin(), live_.end(), id));
    index_.erase(s.cell.name);
    if (s.cell.initial) {
        --initialLive_;
    }
    s = Slot{};
}

std::vector<Name> Heap::names() const {
    std::vector<Name> out;
    out.reserve(live_.size());
    for (CellId id : live_) {
        out.push_back(slots_[id].cell.name);
    }
    return out;
}

const std::vector<CellId>& Heap::edges(CellId id) const {
    const Slot& s = slots_[id];
    if (!s.edgesValid) {
        s.edges.clear();
        if (const Expr* e = s.cell.bound()) {
            std::vector<Name> fv;
            appendFreeVars(*e, fv);
            for (const auto& n : fv) {
                if (auto it = index_.find(n); it != index_.end()) {
                    s.edges.push_back(it->second);
                }
            }
            std::sort(s.edges.begin(), s.edges.end());
            s.edges.erase(std::unique(s.edges.begin(), s.edges.end()), s.edges.end());
        }
        s.edgesValid = true;
    }
    return s.edges;
}

std::uint32_t Heap::nextEpoch() const {
    if (++epoch_ == 0) {
        for (const auto& s : slots_) {
            s.mark = 0;
        }
        epoch_ = 1;
    }
    return epoch_;
}

std::vector<CellId> Heap::reachable(const std::vector<Name>& roots, std::vector<Name>* missing) const {
    const std::uint32_t epoch = nextEpoch();
    std::vector<CellId> order;
    std::vector<CellId> work;
    for (const auto& r : roots) {
        auto it = index_.find(r);
        if (it == index_.end()) {
            if (missing != nullptr) {
                missing->push_back(r);
            }
            continue;
        }
        if (slots_[it->second].mark != epoch) {
            slots_[it->second].mark = epoch;
            work.push_back(it->second);
        }
    }
    while (!work.empty()) {
        CellId id = work.back();
        work.pop_back();
        order.push_back(id);
        for (CellId next : edges(id)) {
            if (slots_[next].live && slots_[next].mark != epoch) {
                slots_[next].mark = epoch;
                work.push_back(next);
            }
        }
    }
    return order;
}

void Heap::markAllInitial() {
    for (CellId id : live_) {
        slots_[id].cell.initial = true;
    }
    initialLive_ = live_.size();
}

std::size_t Heap::retainReachable(const std::vector<Name>& roots) {
    reachable(roots);
    const std::uint32_t epoch = epoch_;
    std::size_t removed = 0;
    std::size_t out = 0;
    for (CellId id : live_) {
        Slot& s = slots_[id];
        if (s.mark == epoch) {
            live_[out++] = id;
            continue;
        }
        index_.erase(s.cell.name);
        if (s.cell.initial) {
            --initialLive_;
        }
        s = Slot{};
        ++removed;
    }
    live_.resize(out);
    return removed;
}

bool Heap::sameBindings(const Heap& other) const {
    if (size() != other.size()) {
        return false;
    }
    for (CellId id : live_) {
        const Cell& c = slots_[id].cell;
        const Cell* o = other.find(c.name);
        if (o == nullptr || c.isBlackhole() != o->isBlackhole()) {
            return false;
        }
        if (c.bound() && !syntacticallyEqual(*c.bound(), *o->bound())) {
            return false;
        }
    }
    return true;
}

}  // namespace lazevm
