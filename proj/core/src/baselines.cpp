#include "headline/baselines.hpp"

#include <vector>

#include "headline/utf8.hpp"

namespace headline {
namespace {

bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
  return cp >= 0xC0 && !utf8::is_space(cp) && cp != U'«' && cp != U'»';
}

bool is_upper(char32_t cp) { return utf8::to_lower(cp) != cp; }

// Single-letter abbreviation guard for a '.' at index i.
bool abbreviation_period(const std::u32string& cps, std::size_t i) {
  if (i == 0 || !is_letter(cps[i - 1])) return false;
  if (i >= 2 && !utf8::is_space(cps[i - 2])) return false;
  if (is_upper(cps[i - 1])) return true;
  std::size_t j = i + 1;
  while (j < cps.size() && utf8::is_space(cps[j])) ++j;
  return j + 1 < cps.size() && is_letter(cps[j]) && cps[j + 1] == U'.';
}

}  // namespace

std::string first_sentence(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (cp != U'.' && cp != U'!' && cp != U'?') continue;
    if (i + 1 < cps.size() && !utf8::is_space(cps[i + 1])) continue;
    if (cp == U'.' && abbreviation_period(cps, i)) continue;
    return utf8::encode(std::u32string_view(cps).substr(0, i + 1));
  }
  return std::string(text);
}

std::string first_sentence_modified(std::string_view text) {
  std::string sentence = first_sentence(text);
  std::erase(sentence, '.');
  const std::vector<std::string> words = utf8::split_whitespace(sentence);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < kModifiedBaselineMaxWords; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace headline
