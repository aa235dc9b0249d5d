#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "flipflop/analysis.hpp"
#include "flipflop/interval.hpp"

namespace ff::io {

constexpr int kSchemaVersion = 1;

// Unreadable or malformed artifact.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form.
std::string fmt(double v);
std::string fmt(std::int64_t v);

// One character per code: '0'..'9' then 'a'..'z'.
std::string codes_to_string(const std::vector<std::uint8_t>& codes);
std::vector<std::uint8_t> codes_from_string(const std::string& s, std::size_t alphabet);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

struct PrefixRow {
    std::int64_t n = 0;
    Interval phi, avg;
    std::string marks;  // scales with a control time at n, ';'-separated
};

constexpr const char* kPrefixHeader = "n,phi_n_lo,phi_n_hi,avg_lo,avg_hi,scale_marks";

// Rows n = 1..T; schedules[i-1] holds the control times of scale i.
void write_prefix_csv(std::ostream& os, const PrefixSums& sums,
                      const std::vector<std::vector<std::int64_t>>& schedules);
std::vector<PrefixRow> read_prefix_csv(std::istream& is);

}  // namespace ff::io
