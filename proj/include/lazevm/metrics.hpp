#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lazevm {

struct Metrics {
    std::uint64_t steps = 0;
    std::uint64_t allocations = 0;
    std::uint64_t thunkUpdates = 0;
    std::uint64_t dupCopies = 0;
    std::uint64_t deepDupThunks = 0;
    // Cells allocated during the run that are still resident, maximised over
    // steps. Without collection this is simply `allocations`.
    std::uint64_t peakLiveCells = 0;
    std::uint64_t finalLiveCells = 0;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

// `key=value` lines in field order.
std::string formatKeyValue(const Metrics& m);

// Every counter except the two heap-size samples, which depend on the GC policy.
bool sameNonGcCounters(const Metrics& a, const Metrics& b);

struct GcPolicy {
    enum class Mode { Off, EveryStep, EveryN };

    Mode mode = Mode::Off;
    std::uint64_t n = 1;

    static GcPolicy off() { return {Mode::Off, 1}; }
    static GcPolicy everyStep() { return {Mode::EveryStep, 1}; }
    // everyN(1) is everyStep().
    static GcPolicy everyN(std::uint64_t n);

    // `off`, `step`, or a positive integer.
    static std::optional<GcPolicy> parse(std::string_view text);
    std::string describe() const;

    friend bool operator==(const GcPolicy&, const GcPolicy&) = default;
};

}  // namespace lazevm
