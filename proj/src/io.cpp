#include "flipflop/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ff::io {

std::string fmt(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fmt(std::int64_t v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string codes_to_string(const std::vector<std::uint8_t>& codes) {
    std::string s(codes.size(), '0');
    for (std::size_t i = 0; i < codes.size(); ++i) {
        std::uint8_t c = codes[i];
        if (c >= 36) throw IoError("code " + std::to_string(c) + " has no character form");
        s[i] = c < 10 ? static_cast<char>('0' + c) : static_cast<char>('a' + c - 10);
    }
    return s;
}

std::vector<std::uint8_t> codes_from_string(const std::string& s, std::size_t alphabet) {
    std::vector<std::uint8_t> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        int c = ch >= '0' && ch <= '9' ? ch - '0' : ch >= 'a' && ch <= 'z' ? ch - 'a' + 10 : -1;
        if (c < 0 || static_cast<std::size_t>(c) >= alphabet)
            throw IoError("invalid code character '" + std::string(1, ch) + "' at position " + std::to_string(i));
        out[i] = static_cast<std::uint8_t>(c);
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_prefix_csv(std::ostream& os, const PrefixSums& sums,
                      const std::vector<std::vector<std::int64_t>>& schedules) {
    const std::int64_t T = sums.length();
    std::vector<std::size_t> cursor(schedules.size(), 0);
    std::string line;
    os << kPrefixHeader << '\n';
    for (std::int64_t n = 1; n <= T; ++n) {
        Interval phi = sums.prefix(n);
        Interval avg = phi / Interval{static_cast<double>(n)};
        line = fmt(n);
        for (double v : {phi.lo, phi.hi, avg.lo, avg.hi}) {
            line += ',';
            line += fmt(v);
        }
        line += ',';
        bool first = true;
        for (std::size_t s = 0; s < schedules.size(); ++s) {
            const auto& P = schedules[s];
            while (cursor[s] < P.size() && P[cursor[s]] < n) ++cursor[s];
            if (cursor[s] < P.size() && P[cursor[s]] == n) {
                if (!first) line += ';';
                line += std::to_string(s + 1);
                first = false;
            }
        }
        line += '\n';
        os << line;
    }
}

namespace {

double parse_double(const std::string& field, std::size_t line_no) {
    double v = 0;
    auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (r.ec != std::errc() || r.ptr != field.data() + field.size())
        throw IoError("line " + std::to_string(line_no) + ": bad number '" + field + "'");
    return v;
}

}  // namespace

std::vector<PrefixRow> read_prefix_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kPrefixHeader) throw IoError("prefix CSV header mismatch");
    std::vector<PrefixRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        for (;;) {
            std::size_t comma = line.find(',', pos);
            f.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (f.size() != 6) throw IoError("line " + std::to_string(line_no) + ": expected 6 fields");
        PrefixRow r;
        std::int64_t n = 0;
        auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), n);
        if (res.ec != std::errc() || res.ptr != f[0].data() + f[0].size())
            throw IoError("line " + std::to_string(line_no) + ": bad index '" + f[0] + "'");
        r.n = n;
        r.phi = {parse_double(f[1], line_no), parse_double(f[2], line_no)};
        r.avg = {parse_double(f[3], line_no), parse_double(f[4], line_no)};
        r.marks = f[5];
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace ff::io
