#pragma once

// LSTM encoder-decoder with additive attention and an optional copy head.
//
// Encoder: bidirectional LSTM over the source; per-position states
// [fw_j; bw_j] are projected linearly to the decoder width, giving h_j.
// The decoder starts from s_0 = tanh([fw_T; bw_1] W_bridge + b_bridge), c_0 = 0.
//
// Decoder step t, given previous token y_{t-1}:
//   e_j   = v . tanh(W_s s_{t-1} + W_h h_j),  alpha = masked softmax(e)
//   ctx   = sum_j alpha_j h_j
//   zeta  = selective read of y_{t-1} (copy model only, else omitted)
//   s_t   = LSTM([embed(y_{t-1}); ctx; zeta], s_{t-1})
//   psi_g = W_o s_t + b_o                    over the fixed vocabulary
//   psi_c(j) = tanh(h_j W_c) . s_t           over unmasked source positions
//   p(y)  = [exp psi_g(y) 1(y in V) + sum_{j: src(j) = y} exp psi_c(j)] / Z
// with a single Z over both score sets. The selective read uses the copy
// scores of the step that emitted y_{t-1}: rho_j proportional to
// exp psi_c(j) over positions holding y_{t-1}, zeta = sum_j rho_j h_j, and the
// zero vector when no position matches.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "headline/autodiff.hpp"
#include "headline/tokenizer.hpp"

namespace headline {

struct ModelConfig {
  TokenLevel token_level = TokenLevel::Subword;
  std::size_t vocab_size = 4000;
  std::size_t embedding_dim = 64;
  std::size_t encoder_hidden_dim = 128;  // per direction
  std::size_t decoder_hidden_dim = 128;
  bool use_copy = true;
  bool bidirectional_encoder = true;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t encoder_output_dim() const { return encoder_hidden_dim * (bidirectional_encoder ? 2 : 1); }
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class ParamInit { Uniform, Zero, LstmBias };

struct ParamSpec {
  std::string name;
  Shape shape;
  ParamInit init;
};

/// Every trainable tensor in a fixed order (also the initialization order).
std::vector<ParamSpec> parameter_layout(const ModelConfig& config);
std::size_t param_count(const ModelConfig& config);

inline constexpr double kInitRange = 0.1;

struct ModelParams {
  ModelConfig config;
  std::map<std::string, Tensor> tensors;

  const Tensor& at(const std::string& name) const;
  std::size_t count() const;
};

/// Uniform [-0.1, 0.1] weights from xoshiro256** seeded with config.seed;
/// zero biases except LSTM forget-gate slices, which are 1.
ModelParams init_params(const ModelConfig& config);

/// Parameters placed on a tape, as trainable leaves or as constants.
class ModelVars {
 public:
  ModelVars(ad::Tape& tape, const ModelParams& params, bool trainable);
  /// Wraps leaves that are already on `tape` (e.g. supplied by grad_check).
  /// `config` must outlive this object.
  ModelVars(ad::Tape& tape, const ModelConfig& config, std::map<std::string, ad::Var> vars);

  ad::Var operator[](const std::string& name) const { return vars_.at(name); }
  const ModelConfig& config() const { return *config_; }
  ad::Tape& tape() const { return *tape_; }

 private:
  ad::Tape* tape_;
  const ModelConfig* config_;
  std::map<std::string, ad::Var> vars_;
};

struct LstmState {
  ad::Var hidden;  // 1 x H
  ad::Var cell;    // 1 x H
};

/// Gates ordered input, forget, candidate, output; weight is (in + H) x 4H.
LstmState lstm_cell(ad::Var input, const LstmState& prev, ad::Var weight, ad::Var bias);

struct EncoderOutput {
  ad::Var states;          // T x Hd, one row per source position
  ad::Var final_state;     // 1 x Hd, decoder initial hidden state
  ad::Var attention_keys;  // T x Hd, h_j W_h
  ad::Var copy_keys;       // Hd x T, tanh(h_j W_c) transposed; invalid without copy
  std::vector<std::uint8_t> mask;  // 1 = real token

  std::size_t length() const { return mask.size(); }
};

/// `mask` marks real tokens and must be a run of ones followed by PAD zeros.
/// PAD rows are excluded from the recurrence and from every downstream score.
EncoderOutput encode_source(const ModelVars& vars, std::span<const TokenId> source_ids,
                            std::span<const std::uint8_t> mask);

struct AttentionOutput {
  ad::Var weights;  // 1 x T
  ad::Var context;  // 1 x Hd
};

AttentionOutput attention(const ModelVars& vars, ad::Var query, const EncoderOutput& enc);

struct DecoderState {
  ad::Var hidden;
  ad::Var cell;
  ad::Var copy_scores;  // 1 x T scores of the previous step; invalid before the first step
};

DecoderState initial_decoder_state(const ModelVars& vars, const EncoderOutput& enc);

/// What the copy head needs to know about the source: the outcome id of each
/// position (vocabulary id, or extended id for OOV pieces) and the size of
/// the extended output space.
struct CopySource {
  std::span<const TokenId> source_outcomes;
  std::size_t extended_size;
};

struct StepOutput {
  DecoderState state;
  ad::Var distribution;  // 1 x extended_size
};

StepOutput decoder_step(const ModelVars& vars, const DecoderState& state, TokenId prev_token,
                        const EncoderOutput& enc, const CopySource& copy);

/// Joint generate/copy normalization: softmax over [gen_scores, copy_scores],
/// then copy mass folded onto each position's outcome id.
ad::Var joint_distribution(ad::Var gen_scores, ad::Var copy_scores, std::span<const TokenId> source_outcomes,
                           std::size_t extended_size);

/// zeta for `token`: copy-score-weighted mean of encoder states at positions
/// whose outcome equals `token`; zeros when none match.
ad::Var selective_read(ad::Tape& tape, ad::Var copy_scores, const EncoderOutput& enc,
                       std::span<const TokenId> source_outcomes, TokenId token, std::size_t width);

}  // namespace headline
