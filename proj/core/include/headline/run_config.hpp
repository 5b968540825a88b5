#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "headline/corpus.hpp"
#include "headline/decoder.hpp"
#include "headline/model.hpp"
#include "headline/trainer.hpp"

namespace headline {

/// Everything a training run needs, read from flat `key = value` text with
/// dotted namespaces (`model.use_copy = true`). Blank lines and lines
/// starting with '#' are ignored; unknown or repeated keys are rejected.
/// The top-level `seed` drives model init, batch order and splitting.
struct RunConfig {
  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::filesystem::path tokenizer_path;  // required for subword; word level trains on train_path when empty
  std::size_t word_vocab_size = 4000;
  std::uint64_t seed = 1;
  ModelConfig model;
  TrainConfig train;
  BeamConfig beam;
  TruncationLimits truncation;
  SplitConfig split;

  void validate() const;

  /// `origin` prefixes error messages (usually the file name).
  static RunConfig parse(std::string_view text, std::string_view origin = "config");
  static RunConfig load(const std::filesystem::path& path);

  /// Every key with its resolved value, sorted; parse(snapshot()) == *this.
  std::string snapshot() const;

  static std::vector<std::string> known_keys();
};

}  // namespace headline
