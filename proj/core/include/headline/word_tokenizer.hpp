#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace headline {

/// Splits on whitespace and detaches each of . , ! ? : ; " « » ( ) - as a
/// standalone token. Case is preserved.
std::vector<std::string> word_tokenize(std::string_view text);

/// Joins tokens with single spaces, except: no space before closing
/// punctuation (. , ! ? : ; ) » and a closing quote), none after opening
/// punctuation (( « and an opening quote). Straight quotes alternate
/// opening/closing.
std::string detokenize(std::span<const std::string> tokens);

bool is_detached_punctuation(char32_t cp);

}  // namespace headline
