#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace headline {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kBosId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr std::size_t kSpecialCount = 4;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

/// Token <-> id map. Ids 0..3 are PAD, UNK, BOS, EOS; learned tokens follow.
class Vocabulary {
 public:
  Vocabulary();

  /// Specials followed by `tokens` in the given order. Fails on duplicates or
  /// on a token that spells a special.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  /// Most frequent tokens first, ties broken lexicographically, truncated so
  /// the total size (specials included) is at most `max_size`.
  static Vocabulary from_counts(const std::map<std::string, std::size_t>& counts, std::size_t max_size);

  std::size_t size() const { return id_to_token_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const { return find(token).value_or(kUnkId); }
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  static bool is_special(TokenId id) { return id >= 0 && static_cast<std::size_t>(id) < kSpecialCount; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.id_to_token_ == b.id_to_token_; }

 private:
  void append(std::string token);

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace headline
