#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headline/bpe.hpp"
#include "headline/vocabulary.hpp"

namespace headline {

enum class TokenLevel { Word, Subword };

std::string_view to_string(TokenLevel level);
TokenLevel parse_token_level(std::string_view text);

/// One trained tokenizer at either level: a BPE model for subwords, or a
/// frequency-ranked word vocabulary for words. Input is normalized
/// (lowercase, collapsed whitespace) before splitting.
class Tokenizer {
 public:
  static Tokenizer subword(BpeModel model);
  static Tokenizer word(Vocabulary vocabulary);

  TokenLevel level() const { return level_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const BpeModel* bpe() const { return bpe_ ? &*bpe_ : nullptr; }

  /// Normalized surface pieces, including ones outside the vocabulary.
  std::vector<std::string> tokenize(std::string_view text) const;
  std::vector<TokenId> encode(std::string_view text) const;
  TokenId id(std::string_view piece) const { return vocabulary_.id(piece); }

  /// Level-appropriate inverse of tokenize: BPE decode or word detokenization.
  std::string join(std::span<const std::string> pieces) const;

  std::string serialize() const;
  static Tokenizer parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Tokenizer load(const std::filesystem::path& path);

 private:
  Tokenizer(TokenLevel level, std::optional<BpeModel> bpe, Vocabulary vocabulary);

  TokenLevel level_;
  std::optional<BpeModel> bpe_;
  Vocabulary vocabulary_;
};

/// Word-level vocabulary of at most `max_vocab_size` entries (specials
/// included) from the normalized, tokenized corpus.
Tokenizer train_word_tokenizer(std::span<const std::string> corpus, std::size_t max_vocab_size);

}  // namespace headline
