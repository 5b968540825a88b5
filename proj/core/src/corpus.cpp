#include "headline/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "headline/error.hpp"
#include "headline/random.hpp"
#include "headline/utf8.hpp"
#include "json.hpp"

namespace headline {

using nlohmann::json;

namespace {

std::string string_field(const json& obj, const char* field, std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw InputError("missing field " + std::string(field) + " at line " + std::to_string(line_no));
  }
  if (!it->is_string()) {
    throw InputError("field " + std::string(field) + " at line " + std::to_string(line_no) + " is not a string");
  }
  auto value = utf8::normalize(it->get<std::string>());
  if (value.empty()) {
    throw InputError("field " + std::string(field) + " at line " + std::to_string(line_no) +
                     " is empty after normalization");
  }
  return value;
}

std::size_t parts_count(std::size_t n, unsigned parts) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * parts / 100.0));
}

}  // namespace

std::vector<Document> parse_jsonl(std::istream& in, bool require_title) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::split_whitespace(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError("malformed JSON at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw InputError("line " + std::to_string(line_no) + " is not a JSON object");
    Document doc;
    doc.text = string_field(obj, "text", line_no);
    if (require_title || obj.contains("title")) doc.title = string_field(obj, "title", line_no);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_jsonl(const std::filesystem::path& path, bool require_title) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read dataset " + path.string());
  try {
    return parse_jsonl(in, require_title);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& d : docs) {
    json obj = {{"text", d.text}, {"title", d.title}};
    out << obj.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

void SplitConfig::validate() const {
  if (train_parts == 0 || val_parts == 0 || test_parts == 0) {
    throw InputError("split ratio parts must all be positive");
  }
  if (train_parts + val_parts + test_parts != 100) {
    throw InputError("split ratio parts must sum to 100, got " +
                     std::to_string(train_parts + val_parts + test_parts));
  }
}

SplitConfig SplitConfig::parse_ratio(std::string_view ratio, std::uint64_t seed) {
  std::vector<unsigned> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = ratio.find(':', start);
    const auto piece = std::string(ratio.substr(start, colon == std::string_view::npos ? colon : colon - start));
    try {
      std::size_t used = 0;
      const long value = std::stol(piece, &used);
      if (used != piece.size() || value < 0) throw std::invalid_argument("bad");
      parts.push_back(static_cast<unsigned>(value));
    } catch (const std::exception&) {
      throw InputError("invalid split ratio '" + std::string(ratio) + "' (expected train:val:test)");
    }
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw InputError("split ratio '" + std::string(ratio) + "' must have three parts");
  SplitConfig config{parts[0], parts[1], parts[2], seed};
  config.validate();
  return config;
}

DatasetSplit split_dataset(std::vector<Document> docs, const SplitConfig& config) {
  config.validate();
  if (docs.size() < kMinSplitDocuments) {
    throw InputError("split needs at least " + std::to_string(kMinSplitDocuments) + " documents, got " +
                     std::to_string(docs.size()));
  }
  Rng rng(mix_seed(config.seed, 0x5B117));
  rng.shuffle(std::span(docs));

  const std::size_t n = docs.size();
  const std::size_t n_val = parts_count(n, config.val_parts);
  const std::size_t n_test = parts_count(n, config.test_parts);
  const std::size_t n_train = n - n_val - n_test;

  DatasetSplit split;
  auto first = std::make_move_iterator(docs.begin());
  split.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(first + static_cast<std::ptrdiff_t>(n_train),
                   first + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_val), std::make_move_iterator(docs.end()));
  return split;
}

void write_split(const std::filesystem::path& dir, const DatasetSplit& split, const SplitConfig& config) {
  std::filesystem::create_directories(dir);
  write_jsonl(dir / "train.jsonl", split.train);
  write_jsonl(dir / "val.jsonl", split.val);
  write_jsonl(dir / "test.jsonl", split.test);
  json manifest = {
      {"seed", config.seed},
      {"ratio", {config.train_parts, config.val_parts, config.test_parts}},
      {"counts", {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}}},
      {"total", split.train.size() + split.val.size() + split.test.size()},
  };
  std::ofstream out(dir / "split.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "split.json").string());
  out << manifest.dump(2) << '\n';
}

TokenId OovMap::add(const std::string& token) {
  if (auto id = find(token)) return *id;
  tokens_.push_back(token);
  return static_cast<TokenId>(vocab_size_ + tokens_.size() - 1);
}

std::optional<TokenId> OovMap::find(std::string_view token) const {
  auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) return std::nullopt;
  return static_cast<TokenId>(vocab_size_ + static_cast<std::size_t>(it - tokens_.begin()));
}

const std::string* OovMap::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) < vocab_size_) return nullptr;
  const auto rank = static_cast<std::size_t>(id) - vocab_size_;
  return rank < tokens_.size() ? &tokens_[rank] : nullptr;
}

namespace {

std::optional<TokenId> in_vocab_id(const Tokenizer& tokenizer, const std::string& piece, std::size_t vocab_size) {
  const auto id = tokenizer.vocabulary().find(piece);
  if (!id || *id == kUnkId || static_cast<std::size_t>(*id) >= vocab_size) return std::nullopt;
  return id;
}

}  // namespace

EncodedExample encode_source_text(std::string_view text, const Tokenizer& tokenizer, const TruncationLimits& limits,
                                  std::size_t vocab_size) {
  if (vocab_size <= kSpecialCount) throw InputError("vocab_size must exceed the special-token count");
  EncodedExample ex;
  ex.oov_map = OovMap(vocab_size);
  ex.source_tokens = tokenizer.tokenize(text);
  const std::size_t limit = limits.for_level(tokenizer.level());
  if (ex.source_tokens.size() > limit) ex.source_tokens.resize(limit);
  if (ex.source_tokens.empty()) throw InputError("source is empty after tokenization and truncation");
  for (const auto& piece : ex.source_tokens) {
    if (auto id = in_vocab_id(tokenizer, piece, vocab_size)) {
      ex.source_ids.push_back(*id);
      ex.source_extended_ids.push_back(*id);
    } else {
      ex.source_ids.push_back(kUnkId);
      ex.source_extended_ids.push_back(ex.oov_map.add(piece));
    }
  }
  return ex;
}

EncodedExample encode_example(const Document& doc, const Tokenizer& tokenizer, const TruncationLimits& limits,
                              std::size_t vocab_size) {
  EncodedExample ex = encode_source_text(doc.text, tokenizer, limits, vocab_size);
  ex.target_tokens = tokenizer.tokenize(doc.title);
  ex.target_ids.push_back(kBosId);
  ex.extended_target_ids.push_back(kBosId);
  for (const auto& piece : ex.target_tokens) {
    if (auto id = in_vocab_id(tokenizer, piece, vocab_size)) {
      ex.target_ids.push_back(*id);
      ex.extended_target_ids.push_back(*id);
    } else {
      ex.target_ids.push_back(kUnkId);
      ex.extended_target_ids.push_back(ex.oov_map.find(piece).value_or(kUnkId));
    }
  }
  ex.target_ids.push_back(kEosId);
  ex.extended_target_ids.push_back(kEosId);
  return ex;
}

std::vector<Batch> make_batches(std::span<const EncodedExample> examples, std::size_t max_tokens_per_batch,
                                std::uint64_t shuffle_seed) {
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return examples[a].source_ids.size() < examples[b].source_ids.size();
  });

  std::vector<Batch> batches;
  Batch current;
  auto finish = [&] {
    if (current.example_indices.empty()) return;
    const std::size_t width = current.max_source_length;
    current.padded_sources.assign(current.example_indices.size() * width, kPadId);
    current.attention_mask.assign(current.example_indices.size() * width, 0);
    for (std::size_t r = 0; r < current.example_indices.size(); ++r) {
      const auto& src = examples[current.example_indices[r]].source_ids;
      for (std::size_t c = 0; c < src.size(); ++c) {
        current.padded_sources[r * width + c] = src[c];
        current.attention_mask[r * width + c] = 1;
      }
    }
    batches.push_back(std::move(current));
    current = Batch{};
  };

  for (std::size_t idx : order) {
    const std::size_t len = examples[idx].source_ids.size();
    if (len > max_tokens_per_batch) {
      throw InputError("example " + std::to_string(idx) + " has " + std::to_string(len) +
                       " source tokens, above the batch budget of " + std::to_string(max_tokens_per_batch));
    }
    const std::size_t width = std::max(current.max_source_length, len);
    if (!current.example_indices.empty() && width * (current.example_indices.size() + 1) > max_tokens_per_batch) {
      finish();
    }
    current.example_indices.push_back(idx);
    current.max_source_length = std::max(current.max_source_length, len);
  }
  finish();

  Rng rng(shuffle_seed);
  rng.shuffle(std::span(batches));
  return batches;
}

}  // namespace headline
