#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "headline/corpus.hpp"
#include "headline/model.hpp"

namespace headline {

inline constexpr int kCheckpointFormatVersion = 1;

/// On-disk layout: the 8-byte magic "HDLNCKPT", the manifest length as a
/// little-endian uint64, the JSON manifest (config, tensor names, shapes and
/// byte offsets, format version, tokenizer, metadata), then every tensor as
/// little-endian IEEE-754 doubles. Offsets are relative to the end of the
/// manifest. Saving a loaded checkpoint reproduces the file byte for byte.
struct Checkpoint {
  ModelParams params;
  std::string tokenizer;  // serialized Tokenizer, may be empty
  TruncationLimits limits;
  std::map<std::string, Tensor> extra_tensors;  // e.g. optimizer moments
  std::string metadata_json = "{}";            // caller-defined JSON object
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view bytes);

}  // namespace headline
