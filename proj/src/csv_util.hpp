// Shared CSV helpers: full-precision numeric formatting and strict numeric
// parsing with path:line diagnostics. All on-disk tables round-trip doubles
// exactly, so everything is written with 17 significant digits and parsed
// with from_chars (whole-field match required).
#ifndef HFM_CSV_UTIL_HPP
#define HFM_CSV_UTIL_HPP

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hfm::csv {

inline void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

inline double parse_field(const std::string& text, std::size_t line_no,
                          const std::string& path) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw_io(path + ":" + std::to_string(line_no) +
                 ": malformed numeric field '" + text + "'");
    return v;
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace hfm::csv

#endif
