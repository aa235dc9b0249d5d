#include "flipflop/sum_tracker.hpp"

namespace ff {

SumTracker::SumTracker(const CodedPotential& pot) : pot_(pot) {
    if (pot_.long_range) {
        table_.emplace(PowerLaw(pot_.long_range->amplitude, pot_.long_range->exponent));
        max_u_ = pot_.max_abs_u();
    }
}

void SumTracker::reset(std::uint8_t code0) {
    windows_.clear();
    now_ = 0;
    last_code_ = code0;
}

void SumTracker::push(std::uint8_t code) {
    ++now_;
    for (auto& w : windows_) {
        ++w.counts[last_code_];
        if (table_) {
            double u = pot_.long_range->u[code];
            if (u != 0.0) w.lr_known += Interval{u} * table_->cum(static_cast<std::uint64_t>(now_ - w.start));
        }
    }
    last_code_ = code;
}

void SumTracker::open() {
    Window w;
    w.start = now_;
    w.counts.assign(pot_.local.size(), 0);
    windows_.push_back(std::move(w));
}

void SumTracker::close() {
    if (windows_.empty()) throw Error(ErrorKind::InvalidArgument, "no open window");
    windows_.pop_back();
}

std::int64_t SumTracker::window_start(std::size_t from_top) const {
    return windows_.at(windows_.size() - 1 - from_top).start;
}

Interval SumTracker::sum(std::size_t from_top) {
    const Window& w = windows_.at(windows_.size() - 1 - from_top);
    Interval s{0.0};
    for (std::size_t c = 0; c < w.counts.size(); ++c)
        if (w.counts[c] != 0) s += Interval{static_cast<double>(w.counts[c])} * pot_.local[c];
    if (table_) {
        s += w.lr_known;
        if (now_ > w.start) {
            Interval unknown = Interval{max_u_} * table_->tail_cum(static_cast<std::uint64_t>(now_ - w.start));
            s += Interval{-unknown.hi, unknown.hi};
        }
    }
    return s;
}

}  // namespace ff
