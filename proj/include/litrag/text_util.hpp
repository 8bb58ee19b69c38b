#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace litrag::text {

/// Number of code points in a UTF-8 string. Stray continuation bytes count as
/// one character each so that malformed input still yields a total length.
std::size_t utf8_length(std::string_view s);

/// Longest prefix of `s` holding at most `max_chars` code points.
std::string_view utf8_prefix(std::string_view s, std::size_t max_chars);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view s);

/// Collapses every whitespace run to a single space and trims the ends.
std::string normalize_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace litrag::text
