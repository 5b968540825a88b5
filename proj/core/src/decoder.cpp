#include "headline/decoder.hpp"

#include "headline/error.hpp"

namespace headline {

void BeamConfig::validate() const {
  if (width < 1) throw InputError("beam width must be at least 1");
  if (max_target_length < 1) throw InputError("max target length must be at least 1");
  if (length_normalization_alpha < 0.0) throw InputError("length normalization alpha must be non-negative");
}

DecodingSession::DecodingSession(const ModelParams& params, const EncodedExample& example)
    : params_(&params), example_(&example) {
  ad::Tape tape;
  const ModelVars vars(tape, params, /*trainable=*/false);
  mask_.assign(example.source_ids.size(), 1);
  const EncoderOutput enc = encode_source(vars, example.source_ids, mask_);
  states_ = enc.states.value();
  attention_keys_ = enc.attention_keys.value();
  if (enc.copy_keys.valid()) copy_keys_ = enc.copy_keys.value();
  initial_ = State{enc.final_state.value(), Tensor({1, params.config.decoder_hidden_dim}), std::nullopt};
}

std::pair<DecodingSession::State, std::vector<double>> DecodingSession::step(const State& state,
                                                                             TokenId prev_token) const {
  ad::Tape tape;
  const ModelVars vars(tape, *params_, /*trainable=*/false);
  EncoderOutput enc;
  enc.states = tape.constant(states_);
  enc.attention_keys = tape.constant(attention_keys_);
  if (copy_keys_) enc.copy_keys = tape.constant(*copy_keys_);
  enc.mask = mask_;

  DecoderState ds{tape.constant(state.hidden), tape.constant(state.cell), {}};
  if (state.copy_scores) ds.copy_scores = tape.constant(*state.copy_scores);

  const CopySource copy{example_->source_extended_ids, example_->extended_size()};
  const StepOutput out = decoder_step(vars, ds, prev_token, enc, copy);

  State next{out.state.hidden.value(), out.state.cell.value(), std::nullopt};
  if (out.state.copy_scores.valid()) next.copy_scores = out.state.copy_scores.value();
  auto probs = out.distribution.value().data();
  return {std::move(next), std::vector<double>(probs.begin(), probs.end())};
}

BeamResult decode_beam(const ModelParams& params, const EncodedExample& example, const BeamConfig& config) {
  const DecodingSession session(params, example);
  return beam_search(
      session.initial(), [&](const DecodingSession::State& s, TokenId prev) { return session.step(s, prev); }, kBosId,
      kEosId, config);
}

Hypothesis decode_greedy(const ModelParams& params, const EncodedExample& example, std::size_t max_target_length) {
  const DecodingSession session(params, example);
  return greedy_search(
      session.initial(), [&](const DecodingSession::State& s, TokenId prev) { return session.step(s, prev); }, kBosId,
      kEosId, max_target_length);
}

std::string resolve_and_postprocess(std::span<const TokenId> ids, const OovMap& oov_map, const Tokenizer& tokenizer) {
  std::vector<std::string> pieces;
  for (TokenId id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    if (id < 0) throw InputError("negative token id " + std::to_string(id));
    if (static_cast<std::size_t>(id) >= oov_map.vocab_size()) {
      const std::string* token = oov_map.token(id);
      if (!token) {
        throw InputError("extended id " + std::to_string(id) + " does not resolve: the OOV map has " +
                         std::to_string(oov_map.size()) + " entries above vocabulary size " +
                         std::to_string(oov_map.vocab_size()));
      }
      pieces.push_back(*token);
    } else {
      pieces.push_back(tokenizer.vocabulary().token(id));
    }
  }
  return tokenizer.join(pieces);
}

}  // namespace headline
