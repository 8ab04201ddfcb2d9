#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heprep::text {

bool is_valid_utf8(std::string_view s);

/// Valid UTF-8 whose code points are all legal XML 1.0 characters.
bool is_xml_text(std::string_view s);

/// Shortest decimal that parses back to exactly `v`.
std::string format_real(double v);

/// Whole-string parse; nullopt on trailing garbage, overflow or empty input.
std::optional<double> parse_real(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

} // namespace heprep::text
