#pragma once

// Shared helpers for the unit and acceptance tests.

#include <filesystem>
#include <string>
#include <vector>

#include "headline/corpus.hpp"
#include "headline/model.hpp"
#include "headline/random.hpp"

namespace headline::testing {

inline std::filesystem::path data_dir() { return HEADLINE_TEST_DATA_DIR; }

/// Hand-built example. `source` holds outcome ids: ids at or above
/// `vocab_size` are OOV pieces (seen by the encoder as UNK). `target` holds
/// the gold outcome ids without BOS/EOS.
inline EncodedExample make_example(std::size_t vocab_size, const std::vector<TokenId>& source,
                                   const std::vector<TokenId>& target) {
  EncodedExample ex;
  ex.oov_map = OovMap(vocab_size);
  for (TokenId id : source) {
    const bool oov = static_cast<std::size_t>(id) >= vocab_size;
    const std::string name = (oov ? "oov" : "tok") + std::to_string(id);
    ex.source_tokens.push_back(name);
    ex.source_ids.push_back(oov ? kUnkId : id);
    ex.source_extended_ids.push_back(oov ? ex.oov_map.add(name) : id);
  }
  ex.target_ids.push_back(kBosId);
  ex.extended_target_ids.push_back(kBosId);
  for (TokenId id : target) {
    const bool oov = static_cast<std::size_t>(id) >= vocab_size;
    ex.target_tokens.push_back((oov ? "oov" : "tok") + std::to_string(id));
    ex.target_ids.push_back(oov ? kUnkId : id);
    ex.extended_target_ids.push_back(id);
  }
  ex.target_ids.push_back(kEosId);
  ex.extended_target_ids.push_back(kEosId);
  return ex;
}

/// init_params with every weight redrawn from [-scale, scale], so tests see
/// saturated gates and peaked distributions rather than near-uniform ones.
inline ModelParams random_params(const ModelConfig& config, std::uint64_t seed, double scale) {
  ModelParams params = init_params(config);
  Rng rng(seed);
  for (auto& [name, tensor] : params.tensors) {
    std::vector<double> values(tensor.size());
    for (double& v : values) v = rng.uniform(-scale, scale);
    tensor = Tensor(tensor.shape(), std::move(values));
  }
  return params;
}

}  // namespace headline::testing
