#include "headline/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "headline/error.hpp"
#include "headline/utf8.hpp"

namespace headline {

namespace {

using SymbolId = std::uint32_t;

std::uint64_t pair_key(SymbolId a, SymbolId b) { return (std::uint64_t{a} << 32) | b; }

struct WordEntry {
  std::vector<SymbolId> symbols;
  std::size_t count;
};

class SymbolTable {
 public:
  SymbolId intern(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<SymbolId>(names_.size()));
    if (inserted) names_.push_back(s);
    return it->second;
  }
  const std::string& name(SymbolId id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::unordered_map<std::string, SymbolId> ids_;
  std::vector<std::string> names_;
};

std::map<std::string, std::size_t> count_words(std::span<const std::string> corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (const auto& word : utf8::split_whitespace(utf8::normalize(text))) ++counts[word];
  }
  return counts;
}

// Merges every non-overlapping occurrence of (a, b), scanning left to right.
template <typename Symbol>
bool merge_in_place(std::vector<Symbol>& symbols, const Symbol& a, const Symbol& b, const Symbol& merged) {
  bool changed = false;
  std::size_t out = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == a && symbols[i + 1] == b) {
      symbols[out++] = merged;
      ++i;
      changed = true;
    } else {
      symbols[out++] = symbols[i];
    }
  }
  symbols.resize(out);
  return changed;
}

}  // namespace

BpeModel::BpeModel(std::vector<MergeRule> merges, Vocabulary vocabulary, std::string marker)
    : merges_(std::move(merges)), vocabulary_(std::move(vocabulary)), marker_(std::move(marker)) {
  if (marker_.empty()) throw InputError("bpe: word boundary marker must be non-empty");
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    ranks_.emplace(std::make_pair(merges_[i].left, merges_[i].right), i);
  }
}

std::vector<std::string> BpeModel::segment_word(std::string_view word) const {
  std::vector<std::string> symbols{marker_};
  for (auto& ch : utf8::split_chars(word)) symbols.push_back(std::move(ch));
  // Applying the lowest-ranked adjacent pair first is equivalent to applying
  // the rules in training order: a rule never references symbols created by
  // later rules.
  while (symbols.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = ranks_.find({symbols[i], symbols[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == merges_.size()) break;
    const auto& rule = merges_[best_rank];
    merge_in_place(symbols, rule.left, rule.right, rule.merged());
  }
  return symbols;
}

std::vector<std::string> BpeModel::tokenize(std::string_view text) const {
  std::vector<std::string> pieces;
  std::unordered_map<std::string, std::vector<std::string>> cache;
  for (const auto& word : utf8::split_whitespace(utf8::normalize(text))) {
    auto it = cache.find(word);
    if (it == cache.end()) it = cache.emplace(word, segment_word(word)).first;
    pieces.insert(pieces.end(), it->second.begin(), it->second.end());
  }
  return pieces;
}

std::vector<TokenId> BpeModel::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& piece : tokenize(text)) ids.push_back(vocabulary_.id(piece));
  return ids;
}

std::string BpeModel::detokenize(std::span<const std::string> pieces) const {
  std::string joined;
  for (const auto& p : pieces) joined += p;
  std::string out;
  std::size_t pos = 0;
  while (pos < joined.size()) {
    if (joined.compare(pos, marker_.size(), marker_) == 0) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      pos += marker_.size();
    } else {
      out.push_back(joined[pos++]);
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string BpeModel::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> pieces;
  for (TokenId id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    pieces.push_back(vocabulary_.token(id));
  }
  return detokenize(pieces);
}

std::size_t bpe_vocab_floor(std::span<const std::string> corpus) {
  std::set<std::string> chars;
  for (const auto& [word, count] : count_words(corpus)) {
    for (auto& ch : utf8::split_chars(word)) chars.insert(std::move(ch));
  }
  return kSpecialCount + chars.size() + 1;
}

BpeModel train_bpe(std::span<const std::string> corpus, std::size_t target_vocab_size) {
  const auto word_counts = count_words(corpus);
  if (word_counts.empty()) throw InputError("bpe: training corpus is empty after normalization");

  SymbolTable table;
  const SymbolId marker = table.intern(std::string(kWordBoundary));
  std::vector<WordEntry> words;
  words.reserve(word_counts.size());
  std::set<std::string> base;
  for (const auto& [word, count] : word_counts) {
    WordEntry entry{{marker}, count};
    for (const auto& ch : utf8::split_chars(word)) {
      entry.symbols.push_back(table.intern(ch));
      base.insert(ch);
    }
    words.push_back(std::move(entry));
  }
  const std::size_t floor = kSpecialCount + base.size() + 1;
  if (target_vocab_size < floor) {
    throw InputError("bpe: target vocabulary size " + std::to_string(target_vocab_size) +
                     " is below the floor of " + std::to_string(floor) + " (4 specials + " +
                     std::to_string(base.size()) + " characters + boundary marker)");
  }

  std::set<SymbolId> vocab_symbols;
  for (SymbolId s = 0; s < table.size(); ++s) vocab_symbols.insert(s);

  std::vector<MergeRule> merges;
  std::unordered_map<std::uint64_t, std::size_t> pair_counts;
  while (kSpecialCount + vocab_symbols.size() < target_vocab_size) {
    pair_counts.clear();
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) pair_counts[pair_key(w.symbols[i], w.symbols[i + 1])] += w.count;
    }
    std::uint64_t best = 0;
    std::size_t best_count = 0;
    for (const auto& [key, count] : pair_counts) {
      if (count < best_count) continue;
      if (count == best_count) {
        const auto& bl = table.name(static_cast<SymbolId>(best >> 32));
        const auto& br = table.name(static_cast<SymbolId>(best & 0xFFFFFFFFu));
        const auto& kl = table.name(static_cast<SymbolId>(key >> 32));
        const auto& kr = table.name(static_cast<SymbolId>(key & 0xFFFFFFFFu));
        if (std::tie(kl, kr) >= std::tie(bl, br)) continue;
      }
      best = key;
      best_count = count;
    }
    if (best_count < 2) break;

    const auto left = static_cast<SymbolId>(best >> 32);
    const auto right = static_cast<SymbolId>(best & 0xFFFFFFFFu);
    MergeRule rule{table.name(left), table.name(right)};
    const SymbolId merged = table.intern(rule.merged());
    for (auto& w : words) merge_in_place(w.symbols, left, right, merged);
    vocab_symbols.insert(merged);
    merges.push_back(std::move(rule));
  }

  // Ids by frequency in the final segmentation, ties lexicographic.
  std::map<std::string, std::size_t> freq;
  for (SymbolId s : vocab_symbols) freq[table.name(s)] = 0;
  for (const auto& w : words) {
    for (SymbolId s : w.symbols) freq[table.name(s)] += w.count;
  }
  return BpeModel(std::move(merges), Vocabulary::from_counts(freq, freq.size() + kSpecialCount));
}

std::string serialize_bpe(const BpeModel& model) {
  std::ostringstream out;
  out << "bpe v1 " << model.vocabulary().size() << ' ' << model.marker() << '\n';
  for (const auto& m : model.merges()) out << m.left << '\t' << m.right << '\n';
  out << "#vocab\n";
  const auto& tokens = model.vocabulary().tokens();
  for (std::size_t id = 0; id < tokens.size(); ++id) out << tokens[id] << '\t' << id << '\n';
  return out.str();
}

BpeModel parse_bpe(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> InputError {
    return InputError("bpe model line " + std::to_string(line_no) + ": " + what);
  };

  if (!std::getline(in, line)) throw InputError("bpe model: empty file");
  ++line_no;
  std::istringstream header(line);
  std::string magic, version, marker;
  std::size_t vocab_size = 0;
  if (!(header >> magic >> version >> vocab_size >> marker) || magic != "bpe" || version != "v1") {
    throw fail("expected header 'bpe v1 <vocab_size> <marker>'");
  }

  std::vector<MergeRule> merges;
  bool in_vocab = false;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    ++line_no;
    if (!in_vocab) {
      if (line == "#vocab") {
        in_vocab = true;
        continue;
      }
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
          line.find('\t', tab + 1) != std::string::npos) {
        throw fail("expected merge 'left<TAB>right'");
      }
      merges.push_back({line.substr(0, tab), line.substr(tab + 1)});
      continue;
    }
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) throw fail("expected vocabulary entry 'token<TAB>id'");
    std::size_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoul(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw fail("invalid token id '" + line.substr(tab + 1) + "'");
    }
    if (id != tokens.size()) {
      throw fail("expected id " + std::to_string(tokens.size()) + ", got " + std::to_string(id));
    }
    tokens.push_back(line.substr(0, tab));
  }
  if (!in_vocab) {
    throw InputError("bpe model truncated: no '#vocab' section; last valid line is " + std::to_string(line_no));
  }
  if (tokens.size() != vocab_size) {
    throw InputError("bpe model truncated: expected " + std::to_string(vocab_size) + " vocabulary entries, found " +
                     std::to_string(tokens.size()) + "; last valid line is " + std::to_string(line_no));
  }
  const std::string_view specials[] = {kPadToken, kUnkToken, kBosToken, kEosToken};
  for (std::size_t i = 0; i < kSpecialCount; ++i) {
    if (tokens[i] != specials[i]) {
      throw InputError("bpe model: id " + std::to_string(i) + " must be " + std::string(specials[i]));
    }
  }
  return BpeModel(std::move(merges),
                  Vocabulary::from_tokens(std::vector<std::string>(tokens.begin() + kSpecialCount, tokens.end())),
                  marker);
}

void save_bpe(const BpeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_bpe(model);
  if (!out) throw Error("failed writing " + path.string());
}

BpeModel load_bpe(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_bpe(buf.str());
}

}  // namespace headline
