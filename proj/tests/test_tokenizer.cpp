#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "headline/bpe.hpp"
#include "headline/corpus.hpp"
#include "headline/error.hpp"
#include "headline/random.hpp"
#include "headline/tokenizer.hpp"
#include "headline/utf8.hpp"
#include "headline/word_tokenizer.hpp"
#include "support.hpp"

namespace headline {
namespace {

using Strings = std::vector<std::string>;
const std::string kMarker(kWordBoundary);

std::vector<std::string> fixture_lines() {
  Strings lines;
  for (const auto& d : load_jsonl(testing::data_dir() / "news.jsonl")) {
    lines.push_back(d.text);
    lines.push_back(d.title);
  }
  return lines;
}

TEST(Utf8, DecodeEncodeRoundTrip) {
  const std::string text = "мид рф «ok» ünï";
  EXPECT_EQ(utf8::encode(utf8::decode(text)), text);
  EXPECT_EQ(utf8::split_chars("ab").size(), 2u);
  EXPECT_EQ(utf8::split_chars("мир").size(), 3u);
}

TEST(Utf8, InvalidBytesBecomeReplacementCharacter) {
  EXPECT_EQ(utf8::decode("a\xFF"), std::u32string(U"a�"));
}

TEST(Utf8, NormalizeLowercasesAndCollapsesWhitespace) {
  EXPECT_EQ(utf8::normalize("  Hello\t\tWORLD \n"), "hello world");
  EXPECT_EQ(utf8::normalize("МИД РФ Ёлка"), "мид рф ёлка");
  EXPECT_EQ(utf8::normalize("ÀÉÎ"), "àéî");
}

TEST(WordTokenizer, DetachesFinalPeriod) {
  EXPECT_EQ(word_tokenize("сыграют в финале."), (Strings{"сыграют", "в", "финале", "."}));
}

TEST(WordTokenizer, DetachesEveryListedPunctuationMark) {
  EXPECT_EQ(word_tokenize("«a»(b)-c:d;e!f?g,\"h\""),
            (Strings{"«", "a", "»", "(", "b", ")", "-", "c", ":", "d", ";", "e", "!", "f", "?", "g", ",", "\"",
                     "h", "\""}));
}

TEST(WordTokenizer, EmptyInput) { EXPECT_TRUE(word_tokenize("").empty()); }

TEST(WordTokenizer, DetokenizeInvertsSimpleSpacing) {
  EXPECT_EQ(detokenize(word_tokenize("a, b")), "a, b");
  EXPECT_EQ(detokenize(word_tokenize("he said: «yes» (twice).")), "he said: «yes» (twice).");
  EXPECT_EQ(detokenize(word_tokenize("a \"quoted\" word")), "a \"quoted\" word");
}

TEST(Bpe, FirstMergeOnRepeatedPair) {
  const BpeModel model = train_bpe(Strings{"aa aa aa"}, 7);
  ASSERT_FALSE(model.merges().empty());
  EXPECT_EQ(model.merges().front(), (MergeRule{"a", "a"}));
  EXPECT_LE(model.vocabulary().size(), 7u);
}

TEST(Bpe, SingleCharacterCorpusHasNoMerges) {
  const BpeModel model = train_bpe(Strings{"z"}, 6);
  EXPECT_TRUE(model.merges().empty());
  EXPECT_EQ(model.vocabulary().size(), 6u);
  EXPECT_TRUE(model.vocabulary().contains("z"));
  EXPECT_TRUE(model.vocabulary().contains(kMarker));
}

TEST(Bpe, LowLowerMergesByHand) {
  // Words ▁low ×2 and ▁lower: (▁,l), (l,o), (o,w) each occur 3 times and the
  // marker sorts after ASCII, so (l,o) wins; then (lo,w) beats (▁,lo); then
  // (▁,low). Every remaining pair occurs once.
  const BpeModel model = train_bpe(Strings{"low low lower"}, 13);
  EXPECT_EQ(model.merges(), (std::vector<MergeRule>{{"l", "o"}, {"lo", "w"}, {kMarker, "low"}}));
}

TEST(Bpe, TargetBelowFloorNamesFloor) {
  try {
    train_bpe(Strings{"abc"}, 5);
    FAIL() << "expected a floor error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("8"), std::string::npos) << e.what();
  }
  EXPECT_EQ(bpe_vocab_floor(Strings{"abc"}), 8u);
}

TEST(Bpe, EmptyCorpusFails) {
  EXPECT_THROW(train_bpe(Strings{}, 50), InputError);
  EXPECT_THROW(train_bpe(Strings{"   "}, 50), InputError);
}

TEST(Bpe, EncodeEmptyText) {
  const BpeModel model = train_bpe(Strings{"мид рф"}, 20);
  EXPECT_TRUE(model.encode("").empty());
}

TEST(Bpe, CyrillicRoundTrip) {
  const BpeModel model = train_bpe(Strings{"мид рф мид", "рф"}, 30);
  EXPECT_EQ(model.decode(model.encode("мид рф")), "мид рф");
  EXPECT_EQ(model.decode(model.encode("МИД  РФ")), "мид рф");
}

TEST(Bpe, UnseenCharacterIsUnk) {
  const BpeModel model = train_bpe(Strings{"abc abc"}, 20);
  const auto ids = model.encode("abq");
  EXPECT_NE(std::find(ids.begin(), ids.end(), kUnkId), ids.end());
}

TEST(Bpe, EncodeNeverEmitsPadBosEos) {
  const BpeModel model = train_bpe(fixture_lines(), 300);
  for (const auto& line : fixture_lines()) {
    for (TokenId id : model.encode(line + " ~unseen~")) {
      EXPECT_TRUE(id != kPadId && id != kBosId && id != kEosId);
    }
  }
}

TEST(Bpe, DecodeEncodeIsNormalize) {
  const auto lines = fixture_lines();
  const BpeModel model = train_bpe(lines, 400);
  for (const auto& line : lines) EXPECT_EQ(model.decode(model.encode(line)), utf8::normalize(line));
}

TEST(Bpe, VocabularyNeverExceedsTarget) {
  const auto lines = fixture_lines();
  for (std::size_t target : {80u, 150u, 400u, 5000u}) {
    EXPECT_LE(train_bpe(lines, target).vocabulary().size(), target);
  }
}

TEST(Bpe, PermutationStable) {
  auto lines = fixture_lines();
  const std::string reference = serialize_bpe(train_bpe(lines, 300));
  Rng rng(12);
  rng.shuffle(std::span(lines));
  EXPECT_EQ(serialize_bpe(train_bpe(lines, 300)), reference);
}

TEST(Bpe, MergesOnlyUseEarlierSymbols) {
  const BpeModel model = train_bpe(fixture_lines(), 300);
  std::set<std::string> known;
  for (const auto& tok : model.vocabulary().tokens()) {
    if (utf8::split_chars(tok).size() == 1) known.insert(tok);
  }
  for (const auto& rule : model.merges()) {
    EXPECT_TRUE(known.contains(rule.left)) << rule.left;
    EXPECT_TRUE(known.contains(rule.right)) << rule.right;
    known.insert(rule.merged());
  }
}

TEST(BpeFile, SaveLoadRoundTrip) {
  const auto lines = fixture_lines();
  const BpeModel model = train_bpe(lines, 300);
  const auto path = std::filesystem::temp_directory_path() / "headline_bpe_roundtrip.bpe";
  save_bpe(model, path);
  const BpeModel loaded = load_bpe(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded.merges(), model.merges());
  EXPECT_EQ(loaded.vocabulary(), model.vocabulary());
  for (const auto& line : lines) EXPECT_EQ(loaded.encode(line), model.encode(line));
}

TEST(BpeFile, HeaderFormat) {
  const std::string text = serialize_bpe(train_bpe(Strings{"aa aa aa"}, 7));
  EXPECT_EQ(text.substr(0, text.find('\n')), "bpe v1 7 " + kMarker);
  EXPECT_NE(text.find("\na\ta\n"), std::string::npos);
  EXPECT_NE(text.find("\n#vocab\n"), std::string::npos);
  EXPECT_NE(text.find("<pad>\t0\n"), std::string::npos);
}

TEST(BpeFile, TruncatedFileNamesLastValidLine) {
  const std::string text = serialize_bpe(train_bpe(Strings{"low low lower"}, 12));
  // Drop the last two vocabulary lines.
  std::string cut = text.substr(0, text.size() - 1);
  cut = cut.substr(0, cut.rfind('\n'));
  cut = cut.substr(0, cut.rfind('\n') + 1);
  const auto lines = std::count(cut.begin(), cut.end(), '\n');
  try {
    parse_bpe(cut);
    FAIL() << "expected a truncation error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("last valid line is " + std::to_string(lines)), std::string::npos) << e.what();
  }
}

TEST(BpeFile, MalformedLineReportsLineNumber) {
  try {
    parse_bpe("bpe v1 6 " + kMarker + "\nonly-one-field\n#vocab\n");
    FAIL() << "expected a parse error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Tokenizer, WordLevelMapsUnseenToUnk) {
  const Tokenizer tok = train_word_tokenizer(Strings{"the cat sat.", "the dog"}, 100);
  EXPECT_EQ(tok.level(), TokenLevel::Word);
  const auto ids = tok.encode("the zebra.");
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids[1], kUnkId);
  EXPECT_NE(ids[0], kUnkId);
}

TEST(Tokenizer, WordVocabularyByFrequencyThenLexicographic) {
  const Tokenizer tok = train_word_tokenizer(Strings{"b a b c a b"}, 100);
  EXPECT_EQ(tok.vocabulary().tokens(), (Strings{"<pad>", "<unk>", "<s>", "</s>", "b", "a", "c"}));
  EXPECT_EQ(train_word_tokenizer(Strings{"b a b c a b"}, 6).vocabulary().size(), 6u);
}

TEST(Tokenizer, SerializeRoundTripBothLevels) {
  const auto lines = fixture_lines();
  for (const Tokenizer& tok : {Tokenizer::subword(train_bpe(lines, 200)), train_word_tokenizer(lines, 150)}) {
    const Tokenizer back = Tokenizer::parse(tok.serialize());
    EXPECT_EQ(back.level(), tok.level());
    EXPECT_EQ(back.vocabulary(), tok.vocabulary());
    EXPECT_EQ(back.serialize(), tok.serialize());
  }
}

TEST(Tokenizer, JoinIsLevelAware) {
  const auto lines = fixture_lines();
  const Tokenizer sub = Tokenizer::subword(train_bpe(lines, 300));
  EXPECT_EQ(sub.join(sub.tokenize("Oslo rovers beat city")), "oslo rovers beat city");
  const Tokenizer word = train_word_tokenizer(lines, 300);
  EXPECT_EQ(word.join(word.tokenize("Oslo rovers, beat city.")), "oslo rovers, beat city.");
}

TEST(Tokenizer, TokenLevelNames) {
  EXPECT_EQ(parse_token_level("word"), TokenLevel::Word);
  EXPECT_EQ(parse_token_level("subword"), TokenLevel::Subword);
  EXPECT_EQ(parse_token_level("bpe"), TokenLevel::Subword);
  EXPECT_THROW(parse_token_level("char"), InputError);
}

}  // namespace
}  // namespace headline
