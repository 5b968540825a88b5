#include <gtest/gtest.h>

#include <filesystem>

#include "headline/bpe.hpp"
#include "headline/checkpoint.hpp"
#include "headline/decoder.hpp"
#include "headline/error.hpp"
#include "support.hpp"

namespace headline {
namespace {

Checkpoint sample() {
  ModelConfig c;
  c.vocab_size = 12;
  c.embedding_dim = 3;
  c.encoder_hidden_dim = 2;
  c.decoder_hidden_dim = 4;
  Checkpoint ck;
  ck.params = testing::random_params(c, 9, 0.7);
  ck.tokenizer = Tokenizer::subword(train_bpe(std::vector<std::string>{"мид рф мид"}, 12)).serialize();
  ck.limits.subword_limit = 123;
  ck.extra_tensors["note"] = Tensor::row({1.5, -2.25});
  ck.metadata_json = R"({"epoch":3})";
  return ck;
}

TEST(Checkpoint, SerializeParseSerializeIsByteExact) {
  const std::string bytes = serialize_checkpoint(sample());
  EXPECT_EQ(bytes.substr(0, 8), "HDLNCKPT");
  const Checkpoint back = parse_checkpoint(bytes);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  EXPECT_EQ(back.params.tensors, sample().params.tensors);
  EXPECT_EQ(back.params.config, sample().params.config);
  EXPECT_EQ(back.tokenizer, sample().tokenizer);
  EXPECT_EQ(back.limits.subword_limit, 123u);
  EXPECT_EQ(back.extra_tensors.at("note"), Tensor::row({1.5, -2.25}));
}

TEST(Checkpoint, FileRoundTripDecodesIdentically) {
  const auto path = std::filesystem::temp_directory_path() / "headline_ckpt_test.ckpt";
  const Checkpoint ck = sample();
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  const EncodedExample ex = testing::make_example(12, {4, 5, 12, 6}, {5});
  EXPECT_EQ(decode_beam(back.params, ex, {3, 8, 0.0}).best.tokens, decode_beam(ck.params, ex, {3, 8, 0.0}).best.tokens);
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::string bytes = serialize_checkpoint(sample());
  EXPECT_THROW(parse_checkpoint("NOTACKPT" + bytes.substr(8)), InputError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, 20)), InputError);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 8)), InputError);
  EXPECT_THROW(parse_checkpoint(""), InputError);
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ckpt"), InputError);
}

TEST(Checkpoint, MissingParameterIsNamed) {
  Checkpoint ck = sample();
  ck.params.tensors.erase("copy.weight");
  try {
    parse_checkpoint(serialize_checkpoint(ck));
    FAIL() << "expected a missing-parameter error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("copy.weight"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace headline
