#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flipflop/core.hpp"

namespace ff {

// Block-indexed sign pattern: block b covers steps [b*tau, (b+1)*tau).
class Pattern {
public:
    // Concatenation of all binary words of length 1, 2, 3, ... in
    // lexicographic order, bit 0 -> '+', bit 1 -> '-'. Its shift orbit is dense.
    static Pattern champernowne();
    // Repeats the given signs forever.
    static Pattern periodic(std::vector<Sign> cycle);

    Sign at(std::uint64_t block) const;
    std::vector<Sign> prefix(std::uint64_t n) const;
    const std::string& tag() const { return tag_; }

private:
    enum class Kind { Champernowne, Periodic };
    Kind kind_ = Kind::Champernowne;
    std::vector<Sign> cycle_;
    std::string tag_;
};

// Smallest B such that the first B blocks contain every sign word of length
// L, found by enumeration; 0 if not found within search_limit blocks.
std::uint64_t all_words_horizon(const Pattern& p, int L, std::uint64_t search_limit = 1u << 24);

Pattern pattern_from_tag(const std::string& tag);

}  // namespace ff
