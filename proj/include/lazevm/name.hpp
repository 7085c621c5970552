#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace lazevm {

// A variable. `uniq` disambiguates binders that share a source spelling;
// rendered as `base#uniq`.
struct Name {
    std::string base;
    std::uint64_t uniq = 0;

    friend bool operator==(const Name& a, const Name& b) {
        return a.uniq == b.uniq && a.base == b.base;
    }
    // Creation order first, which keeps heap listings in allocation order.
    friend std::strong_ordering operator<=>(const Name& a, const Name& b) {
        if (auto c = a.uniq <=> b.uniq; c != 0) {
            return c;
        }
        return a.base.compare(b.base) <=> 0;
    }

    std::string render() const { return base + "#" + std::to_string(uniq); }

    // Inverse of render(); nullopt if `text` is not of the form base#digits.
    static std::optional<Name> parse(std::string_view text);
};

struct NameHash {
    std::size_t operator()(const Name& n) const noexcept {
        // Equal names have equal uniq, so the base can be left out.
        return static_cast<std::size_t>(n.uniq * 0x9E3779B97F4A7C15ull);
    }
};

class NameSupply {
public:
    explicit NameSupply(std::uint64_t next = 1) : next_(next) {}

    Name fresh(std::string base) { return Name{std::move(base), next_++}; }
    Name freshLike(const Name& n) { return Name{n.base, next_++}; }
    std::uint64_t peek() const { return next_; }

private:
    std::uint64_t next_;
};

}  // namespace lazevm
