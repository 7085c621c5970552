#include "lazevm/metrics.hpp"

#include <charconv>
#include <stdexcept>

namespace lazevm {

std::string formatKeyValue(const Metrics& m) {
    std::string out;
    auto line = [&](std::string_view key, std::uint64_t v) {
        out += key;
        out += '=';
        out += std::to_string(v);
        out += '\n';
    };
    line("steps", m.steps);
    line("allocations", m.allocations);
    line("thunkUpdates", m.thunkUpdates);
    line("dupCopies", m.dupCopies);
    line("deepDupThunks", m.deepDupThunks);
    line("peakLiveCells", m.peakLiveCells);
    line("finalLiveCells", m.finalLiveCells);
    return out;
}

bool sameNonGcCounters(const Metrics& a, const Metrics& b) {
    return a.steps == b.steps && a.allocations == b.allocations && a.thunkUpdates == b.thunkUpdates &&
           a.dupCopies == b.dupCopies && a.deepDupThunks == b.deepDupThunks;
}

GcPolicy GcPolicy::everyN(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("GC interval must be positive");
    }
    return n == 1 ? everyStep() : GcPolicy{Mode::EveryN, n};
}

std::optional<GcPolicy> GcPolicy::parse(std::string_view text) {
    if (text == "off") {
        return off();
    }
    if (text == "step") {
        return everyStep();
    }
    std::uint64_t n = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || end != text.data() + text.size() || n == 0) {
        return std::nullopt;
    }
    return everyN(n);
}

std::string GcPolicy::describe() const {
    switch (mode) {
        case Mode::Off: return "off";
        case Mode::EveryStep: return "step";
        case Mode::EveryN: return std::to_string(n);
    }
    return "?";
}

}  // namespace lazevm
