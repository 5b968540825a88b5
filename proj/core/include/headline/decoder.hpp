#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "headline/corpus.hpp"
#include "headline/model.hpp"
#include "headline/tokenizer.hpp"

namespace headline {

struct BeamConfig {
  std::size_t width = 10;
  std::size_t max_target_length = 30;
  double length_normalization_alpha = 0.0;  // 0 = rank by raw log probability

  void validate() const;
  /// Width-2 preset for time-constrained decoding.
  static BeamConfig constrained() { return BeamConfig{2, 30, 0.0}; }
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // generated tokens, BOS excluded, EOS included when finished
  double log_prob = 0.0;

  bool finished(TokenId eos) const { return !tokens.empty() && tokens.back() == eos; }
};

struct BeamResult {
  Hypothesis best;
  std::vector<Hypothesis> finished;  // every hypothesis retired to the pool
};

namespace detail {

inline double beam_score(const Hypothesis& h, double alpha) {
  if (alpha <= 0.0 || h.tokens.empty()) return h.log_prob;
  return h.log_prob / std::pow(static_cast<double>(h.tokens.size()), alpha);
}

// Best first: higher score, then shorter, then lexicographically smaller ids.
inline bool better(const Hypothesis& a, const Hypothesis& b, double alpha) {
  const double sa = beam_score(a, alpha), sb = beam_score(b, alpha);
  if (sa != sb) return sa > sb;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

// Indices of the k most probable outcomes with nonzero probability, ties to the lower id.
inline std::vector<std::size_t> top_k(std::span<const double> probs, std::size_t k) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) idx.push_back(i);
  }
  const auto by_prob = [&](std::size_t a, std::size_t b) {
    return probs[a] != probs[b] ? probs[a] > probs[b] : a < b;
  };
  if (idx.size() > k) {
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), by_prob);
    idx.resize(k);
  } else {
    std::sort(idx.begin(), idx.end(), by_prob);
  }
  return idx;
}

}  // namespace detail

/// Beam search over any step function `step(state, prev_token) -> (state',
/// probabilities)`. Each round expands every live hypothesis with its
/// `width` most probable next tokens and keeps the global top `width`;
/// hypotheses ending in EOS retire to the pool. Search stops once the pool
/// holds `width` hypotheses. After max_target_length non-EOS tokens only EOS
/// may follow, so every returned hypothesis is finished.
template <typename State, typename StepFn>
BeamResult beam_search(State initial, StepFn&& step, TokenId bos, TokenId eos, const BeamConfig& config) {
  config.validate();
  struct Live {
    Hypothesis hyp;
    State state;
  };
  struct Candidate {
    std::size_t parent;
    TokenId token;
    double log_prob;
  };

  std::vector<Live> live;
  live.push_back({Hypothesis{}, std::move(initial)});
  BeamResult result;

  for (std::size_t length = 0; length <= config.max_target_length && !live.empty(); ++length) {
    const bool force_eos = length == config.max_target_length;
    std::vector<Candidate> candidates;
    std::vector<State> next_states;
    next_states.reserve(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      const TokenId prev = live[i].hyp.tokens.empty() ? bos : live[i].hyp.tokens.back();
      auto [state, probs] = step(live[i].state, prev);
      next_states.push_back(std::move(state));
      if (force_eos) {
        const auto e = static_cast<std::size_t>(eos);
        if (e < probs.size() && probs[e] > 0.0) {
          candidates.push_back({i, eos, live[i].hyp.log_prob + std::log(probs[e])});
        }
        continue;
      }
      for (std::size_t tok : detail::top_k(probs, config.width)) {
        candidates.push_back({i, static_cast<TokenId>(tok), live[i].hyp.log_prob + std::log(probs[tok])});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.log_prob > b.log_prob; });
    if (candidates.size() > config.width) candidates.resize(config.width);

    std::vector<Live> next;
    for (const auto& c : candidates) {
      Hypothesis h = live[c.parent].hyp;
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      if (c.token == eos) {
        result.finished.push_back(std::move(h));
      } else {
        next.push_back({std::move(h), next_states[c.parent]});
      }
    }
    live = std::move(next);
    if (result.finished.size() >= config.width) break;
  }
  // Only when EOS was never reachable do unfinished beams stand in; otherwise
  // a prefix would outscore its own completions.
  if (result.finished.empty()) {
    for (auto& l : live) result.finished.push_back(std::move(l.hyp));
  }

  result.best = result.finished.front();
  for (const auto& h : result.finished) {
    if (detail::better(h, result.best, config.length_normalization_alpha)) result.best = h;
  }
  return result;
}

/// Argmax decoding with the same length rule as beam_search.
template <typename State, typename StepFn>
Hypothesis greedy_search(State initial, StepFn&& step, TokenId bos, TokenId eos, std::size_t max_target_length) {
  Hypothesis h;
  State state = std::move(initial);
  for (std::size_t length = 0; length <= max_target_length; ++length) {
    const TokenId prev = h.tokens.empty() ? bos : h.tokens.back();
    auto [next, probs] = step(state, prev);
    state = std::move(next);
    TokenId choice = eos;
    if (length < max_target_length) {
      const auto top = detail::top_k(probs, 1);
      if (top.empty()) break;
      choice = static_cast<TokenId>(top.front());
    } else if (static_cast<std::size_t>(eos) >= probs.size() || !(probs[static_cast<std::size_t>(eos)] > 0.0)) {
      break;
    }
    h.log_prob += std::log(probs[static_cast<std::size_t>(choice)]);
    h.tokens.push_back(choice);
    if (choice == eos) break;
  }
  return h;
}

/// Runs the model one decoder step at a time over fixed parameters and a
/// fixed encoded source. Each step records on its own short-lived tape.
class DecodingSession {
 public:
  struct State {
    Tensor hidden;
    Tensor cell;
    std::optional<Tensor> copy_scores;
  };

  DecodingSession(const ModelParams& params, const EncodedExample& example);

  State initial() const { return initial_; }
  std::pair<State, std::vector<double>> step(const State& state, TokenId prev_token) const;

  std::size_t extended_size() const { return example_->extended_size(); }

 private:
  const ModelParams* params_;
  const EncodedExample* example_;
  Tensor states_;
  Tensor attention_keys_;
  std::optional<Tensor> copy_keys_;
  std::vector<std::uint8_t> mask_;
  State initial_;
};

BeamResult decode_beam(const ModelParams& params, const EncodedExample& example, const BeamConfig& config);
Hypothesis decode_greedy(const ModelParams& params, const EncodedExample& example, std::size_t max_target_length);

/// Extended ids become their source strings, other ids their vocabulary
/// tokens (UNK as "<unk>"); PAD/BOS/EOS are dropped; the pieces are then
/// joined by the tokenizer (BPE decode or word detokenization).
std::string resolve_and_postprocess(std::span<const TokenId> ids, const OovMap& oov_map, const Tokenizer& tokenizer);

}  // namespace headline
