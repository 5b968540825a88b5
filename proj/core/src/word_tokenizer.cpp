#include "headline/word_tokenizer.hpp"

#include "headline/utf8.hpp"

namespace headline {

bool is_detached_punctuation(char32_t cp) {
  switch (cp) {
    case U'.':
    case U',':
    case U'!':
    case U'?':
    case U':':
    case U';':
    case U'"':
    case U'«':
    case U'»':
    case U'(':
    case U')':
    case U'-':
      return true;
    default:
      return false;
  }
}

std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(utf8::encode(current));
    current.clear();
  };
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_space(cp)) {
      flush();
    } else if (is_detached_punctuation(cp)) {
      flush();
      tokens.push_back(utf8::encode(cp));
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  bool quote_open = false;
  bool suppress_next_space = true;
  for (const auto& tok : tokens) {
    bool closing = tok == "." || tok == "," || tok == "!" || tok == "?" || tok == ":" || tok == ";" ||
                   tok == ")" || tok == "»";
    bool opening = tok == "(" || tok == "«";
    if (tok == "\"") {
      closing = quote_open;
      opening = !quote_open;
      quote_open = !quote_open;
    }
    if (!out.empty() && !closing && !suppress_next_space) out.push_back(' ');
    out += tok;
    suppress_next_space = opening;
  }
  return out;
}

}  // namespace headline
