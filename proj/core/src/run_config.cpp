#include "headline/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include "headline/error.hpp"

namespace headline {
namespace {

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InputError("expected true or false, got '" + std::string(text) + "'");
}

std::string format(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
std::string format(std::uint64_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }

template <typename T, typename Member>
Field number(Member member) {
  return {[member](RunConfig& c, std::string_view v) { member(c) = parse_number<T>(v); },
          [member](const RunConfig& c) { using Out = std::conditional_t<std::is_floating_point_v<T>, double, std::uint64_t>;
            return format(static_cast<Out>(member(c))); }};
}

template <typename Member>
Field flag(Member member) {
  return {[member](RunConfig& c, std::string_view v) { member(c) = parse_bool(v); },
          [member](const RunConfig& c) { return format(member(c)); }};
}

template <typename Member>
Field path(Member member) {
  return {[member](RunConfig& c, std::string_view v) { member(c) = std::filesystem::path(std::string(v)); },
          [member](const RunConfig& c) { return member(c).string(); }};
}

#define HEADLINE_MEMBER(expr) [](auto& c) -> auto& { return c.expr; }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"seed", number<std::uint64_t>(HEADLINE_MEMBER(seed))},
      {"data.train", path(HEADLINE_MEMBER(train_path))},
      {"data.val", path(HEADLINE_MEMBER(val_path))},
      {"tokenizer.path", path(HEADLINE_MEMBER(tokenizer_path))},
      {"tokenizer.word_vocab_size", number<std::size_t>(HEADLINE_MEMBER(word_vocab_size))},
      {"model.token_level",
       {[](RunConfig& c, std::string_view v) { c.model.token_level = parse_token_level(v); },
        [](const RunConfig& c) { return std::string(to_string(c.model.token_level)); }}},
      {"model.embedding_dim", number<std::size_t>(HEADLINE_MEMBER(model.embedding_dim))},
      {"model.encoder_hidden_dim", number<std::size_t>(HEADLINE_MEMBER(model.encoder_hidden_dim))},
      {"model.decoder_hidden_dim", number<std::size_t>(HEADLINE_MEMBER(model.decoder_hidden_dim))},
      {"model.use_copy", flag(HEADLINE_MEMBER(model.use_copy))},
      {"model.bidirectional_encoder", flag(HEADLINE_MEMBER(model.bidirectional_encoder))},
      {"train.learning_rate", number<double>(HEADLINE_MEMBER(train.learning_rate))},
      {"train.adam_beta1", number<double>(HEADLINE_MEMBER(train.adam_beta1))},
      {"train.adam_beta2", number<double>(HEADLINE_MEMBER(train.adam_beta2))},
      {"train.adam_eps", number<double>(HEADLINE_MEMBER(train.adam_eps))},
      {"train.clip_norm", number<double>(HEADLINE_MEMBER(train.clip_norm))},
      {"train.max_epochs", number<std::size_t>(HEADLINE_MEMBER(train.max_epochs))},
      {"train.patience", number<std::size_t>(HEADLINE_MEMBER(train.patience))},
      {"train.batch_tokens", number<std::size_t>(HEADLINE_MEMBER(train.batch_tokens))},
      {"train.max_seconds", number<double>(HEADLINE_MEMBER(train.max_seconds))},
      {"beam.width", number<std::size_t>(HEADLINE_MEMBER(beam.width))},
      {"beam.max_target_length", number<std::size_t>(HEADLINE_MEMBER(beam.max_target_length))},
      {"beam.length_normalization_alpha", number<double>(HEADLINE_MEMBER(beam.length_normalization_alpha))},
      {"truncation.word_limit", number<std::size_t>(HEADLINE_MEMBER(truncation.word_limit))},
      {"truncation.subword_limit", number<std::size_t>(HEADLINE_MEMBER(truncation.subword_limit))},
      {"split.train_parts", number<unsigned>(HEADLINE_MEMBER(split.train_parts))},
      {"split.val_parts", number<unsigned>(HEADLINE_MEMBER(split.val_parts))},
      {"split.test_parts", number<unsigned>(HEADLINE_MEMBER(split.test_parts))},
  };
  return table;
}

#undef HEADLINE_MEMBER

}  // namespace

void RunConfig::validate() const {
  if (train_path.empty()) throw InputError("data.train is required");
  if (val_path.empty()) throw InputError("data.val is required");
  if (model.token_level == TokenLevel::Subword && tokenizer_path.empty()) {
    throw InputError("tokenizer.path is required for subword models");
  }
  model.validate();
  train.validate();
  beam.validate();
  split.validate();
  if (truncation.word_limit == 0 || truncation.subword_limit == 0) throw InputError("truncation limits must be positive");
}

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) throw InputError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw InputError(where + "key '" + key + "' set twice");
    try {
      it->second.set(config, value);
    } catch (const InputError& e) {
      throw InputError(where + key + ": " + e.what());
    }
  }
  config.model.seed = config.seed;
  config.train.seed = config.seed;
  config.split.seed = config.seed;
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

std::string RunConfig::snapshot() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
  return out;
}

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> keys;
  for (const auto& entry : fields()) keys.push_back(entry.first);
  return keys;
}

}  // namespace headline
