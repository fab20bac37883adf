#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace solid::text {

std::string_view trim_view(std::string_view s) noexcept;
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);  // ASCII only
bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;
bool is_space(char c) noexcept;

// Runs of whitespace become one space; result is trimmed.
std::string collapse_whitespace(std::string_view s);

// Splits on '\n' (a trailing '\r' is dropped from each line).
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Removes leading list markers such as "1.", "12)", "-", "*", "•".
std::string strip_list_marker(std::string_view line);

// UTF-8 helpers. Invalid bytes decode to U+FFFD and consume one byte.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(const std::vector<char32_t>& cps);
std::size_t utf8_length(std::string_view s);
// Letters from the scripts we expect in entity names (Latin incl.
// extensions, Greek, Cyrillic, Armenian, Hebrew, Arabic, Devanagari,
// CJK, kana, Hangul).
bool is_unicode_letter(char32_t cp) noexcept;

}  // namespace solid::text
