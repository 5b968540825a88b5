#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace headline {

inline constexpr std::size_t kModifiedBaselineMaxWords = 25;

/// The text up to and including the first '.', '!' or '?' that is followed by
/// whitespace or the end of text. A '.' after a single letter is not a
/// boundary when that letter is uppercase ("J. Smith") or when the next word
/// is another single letter with a '.' ("e. g."). Returns the whole text when
/// no boundary exists.
std::string first_sentence(std::string_view text);

/// first_sentence without any '.' characters, cut to the first 25 words.
std::string first_sentence_modified(std::string_view text);

}  // namespace headline
