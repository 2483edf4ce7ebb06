#pragma once

#include <string>
#include <string_view>

// Thin UTF-8 helpers over ICU. Everything in the library passes UTF-8
// std::string around; code point work happens on std::u32string.
namespace cogforge::unicode {

std::string nfc(std::string_view utf8);
std::string nfd(std::string_view utf8);

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);
std::string to_utf8(char32_t cp);

/// Simple (per code point) lowercase mapping.
std::string lower(std::string_view utf8);

bool is_letter(char32_t cp);
bool is_modifier_letter(char32_t cp);
bool is_combining_mark(char32_t cp);
bool is_whitespace(char32_t cp);

/// "U+0040 '@'" style rendering for error messages.
std::string describe(char32_t cp);

}  // namespace cogforge::unicode
