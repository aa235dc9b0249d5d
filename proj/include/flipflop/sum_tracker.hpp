#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flipflop/coefficients.hpp"
#include "flipflop/core.hpp"

namespace ff {

// Running Birkhoff-sum enclosures for a chain that grows one member at a
// time. Each open window [start, now) is enclosed over every point of the
// chain's entrance set: the local part is exact per code, the long-range
// part splits into contributions of already known codes and a bound on the
// not-yet-chosen future.
class SumTracker {
public:
    explicit SumTracker(const CodedPotential& pot);

    // Position 0 code; must be called once before any push.
    void reset(std::uint8_t code0);
    // The chain grew by one member; its code sits at position now()+1.
    void push(std::uint8_t code);
    std::int64_t now() const { return now_; }

    // Opens a window starting at now(); windows nest as a stack.
    void open();
    void close();
    std::size_t depth() const { return windows_.size(); }
    // Sum over the innermost window (level 0) or an outer one.
    Interval sum(std::size_t from_top = 0);
    std::int64_t window_start(std::size_t from_top = 0) const;

private:
    struct Window {
        std::int64_t start = 0;
        std::vector<std::int64_t> counts;
        Interval lr_known{0.0};
    };
    const CodedPotential& pot_;
    std::optional<CoefficientTable> table_;
    double max_u_ = 0.0;
    std::vector<Window> windows_;
    std::int64_t now_ = 0;
    std::uint8_t last_code_ = 0;
};

}  // namespace ff
