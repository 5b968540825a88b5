#include "headline/tokenizer.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "headline/error.hpp"
#include "headline/utf8.hpp"
#include "headline/word_tokenizer.hpp"

namespace headline {

std::string_view to_string(TokenLevel level) { return level == TokenLevel::Word ? "word" : "subword"; }

TokenLevel parse_token_level(std::string_view text) {
  if (text == "word") return TokenLevel::Word;
  if (text == "subword" || text == "bpe") return TokenLevel::Subword;
  throw InputError("unknown token level '" + std::string(text) + "' (expected word or subword)");
}

Tokenizer::Tokenizer(TokenLevel level, std::optional<BpeModel> bpe, Vocabulary vocabulary)
    : level_(level), bpe_(std::move(bpe)), vocabulary_(std::move(vocabulary)) {}

Tokenizer Tokenizer::subword(BpeModel model) {
  auto vocab = model.vocabulary();
  return Tokenizer(TokenLevel::Subword, std::move(model), std::move(vocab));
}

Tokenizer Tokenizer::word(Vocabulary vocabulary) { return Tokenizer(TokenLevel::Word, std::nullopt, std::move(vocabulary)); }

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  if (bpe_) return bpe_->tokenize(text);
  return word_tokenize(utf8::normalize(text));
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& piece : tokenize(text)) ids.push_back(vocabulary_.id(piece));
  return ids;
}

std::string Tokenizer::join(std::span<const std::string> pieces) const {
  if (bpe_) return bpe_->detokenize(pieces);
  return detokenize(pieces);
}

std::string Tokenizer::serialize() const {
  if (bpe_) return serialize_bpe(*bpe_);
  std::ostringstream out;
  out << "word v1 " << vocabulary_.size() << '\n' << "#vocab\n";
  const auto& tokens = vocabulary_.tokens();
  for (std::size_t id = 0; id < tokens.size(); ++id) out << tokens[id] << '\t' << id << '\n';
  return out.str();
}

Tokenizer Tokenizer::parse(std::string_view text) {
  if (text.starts_with("bpe ")) return subword(parse_bpe(text));
  // The word format is the BPE format without merges; reuse its parser.
  if (!text.starts_with("word ")) throw InputError("tokenizer file line 1: expected 'bpe v1' or 'word v1' header");
  const auto eol = text.find('\n');
  std::istringstream header{std::string(text.substr(0, eol))};
  std::string magic, version;
  std::size_t size = 0;
  if (!(header >> magic >> version >> size) || version != "v1") {
    throw InputError("tokenizer file line 1: expected header 'word v1 <vocab_size>'");
  }
  std::string rewritten = "bpe v1 " + std::to_string(size) + " " + std::string(kWordBoundary);
  if (eol != std::string_view::npos) rewritten += std::string(text.substr(eol));
  auto model = parse_bpe(rewritten);
  if (!model.merges().empty()) throw InputError("word tokenizer file must not contain merges");
  return word(model.vocabulary());
}

void Tokenizer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize();
}

Tokenizer Tokenizer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

Tokenizer train_word_tokenizer(std::span<const std::string> corpus, std::size_t max_vocab_size) {
  if (max_vocab_size <= kSpecialCount) {
    throw InputError("word vocabulary size must exceed " + std::to_string(kSpecialCount));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& tok : word_tokenize(utf8::normalize(text))) ++counts[std::move(tok)];
  }
  if (counts.empty()) throw InputError("word tokenizer: training corpus is empty after normalization");
  return Tokenizer::word(Vocabulary::from_counts(counts, max_vocab_size));
}

}  // namespace headline
