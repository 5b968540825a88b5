#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace headline::utf8 {

/// Decodes UTF-8; invalid sequences become U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

/// One string per code point.
std::vector<std::string> split_chars(std::string_view text);

/// Simple case folding for ASCII, Latin-1, Greek and Cyrillic. No
/// locale-sensitive or multi-character mappings.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

bool is_space(char32_t cp);

std::vector<std::string> split_whitespace(std::string_view text);

/// Lowercase, collapse whitespace runs to one ASCII space, trim both ends.
std::string normalize(std::string_view text);

}  // namespace headline::utf8
