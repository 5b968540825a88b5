#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "headline/tokenizer.hpp"

namespace headline {

struct Document {
  std::string text;
  std::string title;

  friend bool operator==(const Document&, const Document&) = default;
};

/// One JSON object per line with string fields "text" and "title". Fields
/// are normalized (lowercase, collapsed whitespace). Blank lines are skipped.
/// With `require_title` false a missing title reads as empty (inference input).
std::vector<Document> load_jsonl(const std::filesystem::path& path, bool require_title = true);
std::vector<Document> parse_jsonl(std::istream& in, bool require_title = true);
void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs);

struct SplitConfig {
  unsigned train_parts = 90;
  unsigned val_parts = 5;
  unsigned test_parts = 5;
  std::uint64_t seed = 0;

  void validate() const;
  /// "train:val:test", e.g. "90:5:5".
  static SplitConfig parse_ratio(std::string_view ratio, std::uint64_t seed);
};

struct DatasetSplit {
  std::vector<Document> train;
  std::vector<Document> val;
  std::vector<Document> test;
};

inline constexpr std::size_t kMinSplitDocuments = 20;

/// Seeded shuffle, then val/test get round(n * parts / 100) documents each
/// and train takes the remainder.
DatasetSplit split_dataset(std::vector<Document> docs, const SplitConfig& config);

/// Writes train.jsonl, val.jsonl, test.jsonl and split.json into `dir`.
void write_split(const std::filesystem::path& dir, const DatasetSplit& split, const SplitConfig& config);

struct TruncationLimits {
  std::size_t word_limit = 400;
  std::size_t subword_limit = 800;

  std::size_t for_level(TokenLevel level) const { return level == TokenLevel::Word ? word_limit : subword_limit; }
};

/// Out-of-vocabulary source tokens in order of first occurrence. The token
/// at rank k has extended id vocab_size + k.
class OovMap {
 public:
  explicit OovMap(std::size_t vocab_size = 0) : vocab_size_(vocab_size) {}

  TokenId add(const std::string& token);
  std::optional<TokenId> find(std::string_view token) const;
  /// Source string for an extended id, or nullptr.
  const std::string* token(TokenId id) const;

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::size_t vocab_size_;
  std::vector<std::string> tokens_;
};

struct EncodedExample {
  std::vector<TokenId> source_ids;           // UNK for OOV pieces, no BOS/EOS
  std::vector<std::string> source_tokens;    // aligned with source_ids
  std::vector<TokenId> source_extended_ids;  // OOV pieces carry their extended id
  std::vector<TokenId> target_ids;           // BOS ... EOS; empty when no title
  std::vector<std::string> target_tokens;    // without BOS/EOS
  std::vector<TokenId> extended_target_ids;  // UNK replaced where copyable
  OovMap oov_map;

  std::size_t vocab_size() const { return oov_map.vocab_size(); }
  std::size_t extended_size() const { return oov_map.vocab_size() + oov_map.size(); }
};

/// Tokenizes and truncates the source (prefix truncation), builds the OOV map
/// from the truncated source, then encodes the title against it. A piece is in
/// vocabulary iff its tokenizer id is below `vocab_size` and is not UNK.
EncodedExample encode_example(const Document& doc, const Tokenizer& tokenizer, const TruncationLimits& limits,
                              std::size_t vocab_size);
/// Source side only, for inference.
EncodedExample encode_source_text(std::string_view text, const Tokenizer& tokenizer, const TruncationLimits& limits,
                                  std::size_t vocab_size);

struct Batch {
  std::vector<std::size_t> example_indices;
  std::size_t max_source_length = 0;
  std::vector<TokenId> padded_sources;      // row-major, example_indices.size() x max_source_length
  std::vector<std::uint8_t> attention_mask;  // 1 = real token, 0 = PAD

  std::size_t padded_tokens() const { return padded_sources.size(); }
};

/// Sorts by source length and groups greedily so each batch's padded size
/// (count x longest source) fits the budget; batch order is then shuffled
/// with `shuffle_seed`.
std::vector<Batch> make_batches(std::span<const EncodedExample> examples, std::size_t max_tokens_per_batch,
                                std::uint64_t shuffle_seed);

}  // namespace headline
