#include "headline/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "headline/error.hpp"
#include "json.hpp"

namespace headline {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "HDLNCKPT";

void append_le64(std::string& out, std::uint64_t bits) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint64_t read_le64(std::string_view bytes, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= std::uint64_t{static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)])} << (8 * i);
  }
  return bits;
}

json config_to_json(const ModelConfig& c) {
  return {{"token_level", std::string(to_string(c.token_level))},
          {"vocab_size", c.vocab_size},
          {"embedding_dim", c.embedding_dim},
          {"encoder_hidden_dim", c.encoder_hidden_dim},
          {"decoder_hidden_dim", c.decoder_hidden_dim},
          {"use_copy", c.use_copy},
          {"bidirectional_encoder", c.bidirectional_encoder},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.token_level = parse_token_level(j.at("token_level").get<std::string>());
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.encoder_hidden_dim = j.at("encoder_hidden_dim").get<std::size_t>();
  c.decoder_hidden_dim = j.at("decoder_hidden_dim").get<std::size_t>();
  c.use_copy = j.at("use_copy").get<bool>();
  c.bidirectional_encoder = j.at("bidirectional_encoder").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

void append_tensor_entries(json& list, std::string& data, const std::map<std::string, Tensor>& tensors,
                           const char* group) {
  for (const auto& [name, t] : tensors) {
    list.push_back({{"name", name}, {"group", group}, {"shape", t.shape()}, {"offset", data.size()}});
    for (double v : t.data()) append_le64(data, std::bit_cast<std::uint64_t>(v));
  }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  json tensors = json::array();
  std::string data;
  append_tensor_entries(tensors, data, ck.params.tensors, "param");
  append_tensor_entries(tensors, data, ck.extra_tensors, "extra");

  json metadata = json::parse(ck.metadata_json);
  if (!metadata.is_object()) throw Error("checkpoint metadata must be a JSON object");
  json manifest = {
      {"format_version", kCheckpointFormatVersion},
      {"config", config_to_json(ck.params.config)},
      {"tensors", tensors},
      {"tokenizer", ck.tokenizer},
      {"truncation", {{"word_limit", ck.limits.word_limit}, {"subword_limit", ck.limits.subword_limit}}},
      {"metadata", metadata},
      {"data_bytes", data.size()},
  };
  const std::string text = manifest.dump();
  std::string out(kMagic);
  append_le64(out, text.size());
  out += text;
  out += data;
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw InputError("not a checkpoint file (bad magic)");
  }
  const std::uint64_t manifest_len = read_le64(bytes, kMagic.size());
  const std::size_t manifest_begin = kMagic.size() + 8;
  if (manifest_len > bytes.size() - manifest_begin) throw InputError("checkpoint truncated inside manifest");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(manifest_begin, manifest_len));
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }
  const std::string_view data = bytes.substr(manifest_begin + manifest_len);

  try {
    if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw InputError("unsupported checkpoint format version " + manifest.at("format_version").dump());
    }
    if (manifest.at("data_bytes").get<std::size_t>() != data.size()) {
      throw InputError("checkpoint data section has " + std::to_string(data.size()) + " bytes, manifest says " +
                       manifest.at("data_bytes").dump());
    }
    Checkpoint ck;
    ck.params.config = config_from_json(manifest.at("config"));
    ck.tokenizer = manifest.at("tokenizer").get<std::string>();
    ck.limits.word_limit = manifest.at("truncation").at("word_limit").get<std::size_t>();
    ck.limits.subword_limit = manifest.at("truncation").at("subword_limit").get<std::size_t>();
    ck.metadata_json = manifest.at("metadata").dump();

    for (const auto& entry : manifest.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const std::size_t n = shape_size(shape);
      if (offset > data.size() || n > (data.size() - offset) / 8) {
        throw InputError("tensor '" + name + "' extends past the end of the checkpoint");
      }
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<double>(read_le64(data, offset + 8 * i));
      const auto group = entry.at("group").get<std::string>();
      auto& target = group == "param" ? ck.params.tensors : ck.extra_tensors;
      target.emplace(name, Tensor(shape, std::move(values)));
    }

    for (const auto& spec : parameter_layout(ck.params.config)) {
      auto it = ck.params.tensors.find(spec.name);
      if (it == ck.params.tensors.end()) throw InputError("checkpoint is missing parameter '" + spec.name + "'");
      if (it->second.shape() != spec.shape) {
        throw InputError("parameter '" + spec.name + "' has shape " + shape_to_string(it->second.shape()) +
                         ", config expects " + shape_to_string(spec.shape));
      }
    }
    return ck;
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint manifest is malformed: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace headline
