#include "flipflop/pattern.hpp"

#include <vector>

namespace ff {

Pattern Pattern::champernowne() {
    Pattern p;
    p.kind_ = Kind::Champernowne;
    p.tag_ = "champernowne";
    return p;
}

Pattern Pattern::periodic(std::vector<Sign> cycle) {
    if (cycle.empty()) throw Error(ErrorKind::InvalidArgument, "periodic pattern needs a non-empty cycle");
    Pattern p;
    p.kind_ = Kind::Periodic;
    p.tag_ = "periodic:" + signs_to_string(cycle);
    p.cycle_ = std::move(cycle);
    return p;
}

Sign Pattern::at(std::uint64_t block) const {
    if (kind_ == Kind::Periodic) return cycle_[block % cycle_.size()];
    // level L holds 2^L words of L bits each
    std::uint64_t offset = block;
    unsigned L = 1;
    while (true) {
        std::uint64_t level = std::uint64_t{L} << L;
        if (offset < level) break;
        offset -= level;
        ++L;
    }
    std::uint64_t word = offset / L;
    unsigned bit = static_cast<unsigned>(offset % L);
    bool one = (word >> (L - 1 - bit)) & 1u;
    return one ? Sign::Minus : Sign::Plus;
}

std::vector<Sign> Pattern::prefix(std::uint64_t n) const {
    std::vector<Sign> v;
    v.reserve(n);
    for (std::uint64_t b = 0; b < n; ++b) v.push_back(at(b));
    return v;
}

std::uint64_t all_words_horizon(const Pattern& p, int L, std::uint64_t search_limit) {
    if (L < 1 || L > 24) throw Error(ErrorKind::InvalidArgument, "word length must be in [1, 24]");
    const std::uint64_t total = std::uint64_t{1} << L;
    const std::uint64_t mask = total - 1;
    std::vector<bool> seen(total, false);
    std::uint64_t found = 0, window = 0;
    for (std::uint64_t b = 0; b < search_limit; ++b) {
        window = ((window << 1) | (p.at(b) == Sign::Minus ? 1u : 0u)) & mask;
        if (b + 1 < static_cast<std::uint64_t>(L)) continue;
        if (!seen[window]) {
            seen[window] = true;
            if (++found == total) return b + 1;
        }
    }
    return 0;
}

Pattern pattern_from_tag(const std::string& tag) {
    if (tag == "champernowne") return Pattern::champernowne();
    const std::string prefix = "periodic:";
    if (tag.rfind(prefix, 0) == 0) return Pattern::periodic(signs_from_string(tag.substr(prefix.size())));
    throw Error(ErrorKind::InvalidArgument, "unknown pattern '" + tag + "'");
}

}  // namespace ff
