#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace aci::csv {

/// Shortest decimal text that parses back to exactly the same double.
[[nodiscard]] std::string format_double(double v);

/// Splits one line on commas. Quoting is not supported by any of our formats.
[[nodiscard]] std::vector<std::string_view> split(std::string_view line);

// Field parsers; throw ParseError(line, ...) on malformed text.
[[nodiscard]] double parse_double(std::string_view field, std::size_t line);
[[nodiscard]] long long parse_int(std::string_view field, std::size_t line);
[[nodiscard]] bool parse_bool(std::string_view field, std::size_t line);

/// Reads lines, stripping a trailing '\r'. Returns false at end of input.
bool read_line(std::istream& in, std::string& line);

/// Reads the header line and throws ParseError unless it equals `expected`.
void expect_header(std::istream& in, std::string_view expected);

}  // namespace aci::csv
