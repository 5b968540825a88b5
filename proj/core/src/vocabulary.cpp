#include "headline/vocabulary.hpp"

#include <algorithm>

#include "headline/error.hpp"

namespace headline {

Vocabulary::Vocabulary() {
  for (auto special : {kPadToken, kUnkToken, kBosToken, kEosToken}) append(std::string(special));
}

void Vocabulary::append(std::string token) {
  if (token_to_id_.contains(token)) throw InputError("duplicate vocabulary token '" + token + "'");
  const auto id = static_cast<TokenId>(id_to_token_.size());
  token_to_id_.emplace(token, id);
  id_to_token_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  for (const auto& t : tokens) vocab.append(t);
  return vocab;
}

Vocabulary Vocabulary::from_counts(const std::map<std::string, std::size_t>& counts, std::size_t max_size) {
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary vocab;
  for (const auto& [token, count] : ranked) {
    if (vocab.size() >= max_size) break;
    if (vocab.contains(token)) continue;
    vocab.append(token);
  }
  return vocab;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(id_to_token_.size()));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

}  // namespace headline
