#include "aci/csv.hpp"

#include <charconv>
#include <cmath>

#include "aci/errors.hpp"

namespace aci::csv {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty() ||
        !std::isfinite(v)) {
        throw ParseError(line, "expected a number, got '" + std::string(field) + "'");
    }
    return v;
}

long long parse_int(std::string_view field, std::size_t line) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(line, "expected an integer, got '" + std::string(field) + "'");
    }
    return v;
}

bool parse_bool(std::string_view field, std::size_t line) {
    if (field == "1" || field == "true") return true;
    if (field == "0" || field == "false") return false;
    throw ParseError(line, "expected a boolean, got '" + std::string(field) + "'");
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void expect_header(std::istream& in, std::string_view expected) {
    std::string header;
    if (!read_line(in, header)) throw ParseError(1, "missing header");
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    if (header != expected) {
        throw ParseError(1, "unexpected header '" + header + "', expected '" +
                                std::string(expected) + "'");
    }
}

}  // namespace aci::csv
