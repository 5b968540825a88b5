#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "headline/vocabulary.hpp"

namespace headline {

/// U+2581, prefixed as its own symbol to every word before merging.
inline constexpr std::string_view kWordBoundary = "\xE2\x96\x81";

struct MergeRule {
  std::string left;
  std::string right;

  std::string merged() const { return left + right; }
  friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

/// Trained byte-pair encoding: ordered merge rules plus the vocabulary of
/// base symbols and merged symbols. Immutable; encode/decode are thread-safe.
class BpeModel {
 public:
  BpeModel(std::vector<MergeRule> merges, Vocabulary vocabulary, std::string marker = std::string(kWordBoundary));

  const std::vector<MergeRule>& merges() const { return merges_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const std::string& marker() const { return marker_; }

  /// Normalized text split into subword pieces. Pieces that are not in the
  /// vocabulary (unseen characters) are kept verbatim.
  std::vector<std::string> tokenize(std::string_view text) const;
  std::vector<TokenId> encode(std::string_view text) const;

  /// Inverse of tokenize on normalized text: concatenate, turn markers into
  /// spaces, trim.
  std::string detokenize(std::span<const std::string> pieces) const;
  /// Specials other than UNK are skipped; UNK renders as "<unk>".
  std::string decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> segment_word(std::string_view word) const;

  std::vector<MergeRule> merges_;
  Vocabulary vocabulary_;
  std::string marker_;
  std::map<std::pair<std::string, std::string>, std::size_t> ranks_;
};

/// Smallest admissible target: 4 specials + distinct characters + marker.
std::size_t bpe_vocab_floor(std::span<const std::string> corpus);

/// Greedy merge training. Repeatedly merges the most frequent adjacent pair
/// (ties: smallest (left, right)) until the vocabulary reaches the target or
/// no pair occurs at least twice.
BpeModel train_bpe(std::span<const std::string> corpus, std::size_t target_vocab_size);

std::string serialize_bpe(const BpeModel& model);
BpeModel parse_bpe(std::string_view text);
void save_bpe(const BpeModel& model, const std::filesystem::path& path);
BpeModel load_bpe(const std::filesystem::path& path);

}  // namespace headline
