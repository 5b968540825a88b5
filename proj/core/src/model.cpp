#include "headline/model.hpp"

#include <stdexcept>

#include "headline/error.hpp"
#include "headline/random.hpp"

namespace headline {

using ad::Var;

void ModelConfig::validate() const {
  if (vocab_size <= kSpecialCount) throw InputError("model.vocab_size must exceed " + std::to_string(kSpecialCount));
  if (embedding_dim == 0 || encoder_hidden_dim == 0 || decoder_hidden_dim == 0) {
    throw InputError("model dimensions must be positive");
  }
}

std::vector<ParamSpec> parameter_layout(const ModelConfig& c) {
  c.validate();
  const std::size_t V = c.vocab_size, E = c.embedding_dim, He = c.encoder_hidden_dim, Hd = c.decoder_hidden_dim;
  const std::size_t D = c.encoder_output_dim();
  std::vector<ParamSpec> specs{
      {"embedding.source", {V, E}, ParamInit::Uniform},
      {"embedding.target", {V, E}, ParamInit::Uniform},
      {"encoder.forward.weight", {E + He, 4 * He}, ParamInit::Uniform},
      {"encoder.forward.bias", {1, 4 * He}, ParamInit::LstmBias},
  };
  if (c.bidirectional_encoder) {
    specs.push_back({"encoder.backward.weight", {E + He, 4 * He}, ParamInit::Uniform});
    specs.push_back({"encoder.backward.bias", {1, 4 * He}, ParamInit::LstmBias});
  }
  const std::size_t decoder_input = E + Hd + (c.use_copy ? Hd : 0);
  specs.insert(specs.end(), {
                                {"encoder.projection.weight", {D, Hd}, ParamInit::Uniform},
                                {"encoder.projection.bias", {1, Hd}, ParamInit::Zero},
                                {"bridge.weight", {D, Hd}, ParamInit::Uniform},
                                {"bridge.bias", {1, Hd}, ParamInit::Zero},
                                {"decoder.weight", {decoder_input + Hd, 4 * Hd}, ParamInit::Uniform},
                                {"decoder.bias", {1, 4 * Hd}, ParamInit::LstmBias},
                                {"attention.query", {Hd, Hd}, ParamInit::Uniform},
                                {"attention.key", {Hd, Hd}, ParamInit::Uniform},
                                {"attention.score", {Hd, 1}, ParamInit::Uniform},
                                {"generate.weight", {Hd, V}, ParamInit::Uniform},
                                {"generate.bias", {1, V}, ParamInit::Zero},
                            });
  if (c.use_copy) specs.push_back({"copy.weight", {Hd, Hd}, ParamInit::Uniform});
  return specs;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t total = 0;
  for (const auto& spec : parameter_layout(config)) total += shape_size(spec.shape);
  return total;
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw InputError("model has no parameter '" + name + "'");
  return it->second;
}

std::size_t ModelParams::count() const {
  std::size_t total = 0;
  for (const auto& [name, t] : tensors) total += t.size();
  return total;
}

ModelParams init_params(const ModelConfig& config) {
  ModelParams params{config, {}};
  Rng rng(config.seed);
  for (const auto& spec : parameter_layout(config)) {
    std::vector<double> data(shape_size(spec.shape), 0.0);
    switch (spec.init) {
      case ParamInit::Uniform:
        for (auto& v : data) v = rng.uniform(-kInitRange, kInitRange);
        break;
      case ParamInit::Zero:
        break;
      case ParamInit::LstmBias: {
        const std::size_t hidden = data.size() / 4;
        for (std::size_t i = hidden; i < 2 * hidden; ++i) data[i] = 1.0;
        break;
      }
    }
    params.tensors.emplace(spec.name, Tensor(spec.shape, std::move(data)));
  }
  return params;
}

ModelVars::ModelVars(ad::Tape& tape, const ModelParams& params, bool trainable)
    : tape_(&tape), config_(&params.config) {
  for (const auto& [name, value] : params.tensors) {
    vars_.emplace(name, trainable ? tape.parameter(name, value) : tape.constant(value));
  }
}

ModelVars::ModelVars(ad::Tape& tape, const ModelConfig& config, std::map<std::string, Var> vars)
    : tape_(&tape), config_(&config), vars_(std::move(vars)) {
  for (const auto& spec : parameter_layout(config)) {
    if (!vars_.contains(spec.name)) throw std::invalid_argument("ModelVars: missing parameter " + spec.name);
  }
}

LstmState lstm_cell(Var input, const LstmState& prev, Var weight, Var bias) {
  const std::size_t H = prev.hidden.value().cols();
  const Var joined[] = {input, prev.hidden};
  const Var gates = ad::add(ad::matmul(ad::concat(joined, 1), weight), bias);
  const Var in_gate = ad::sigmoid(ad::slice_cols(gates, 0, H));
  const Var forget_gate = ad::sigmoid(ad::slice_cols(gates, H, 2 * H));
  const Var candidate = ad::tanh(ad::slice_cols(gates, 2 * H, 3 * H));
  const Var out_gate = ad::sigmoid(ad::slice_cols(gates, 3 * H, 4 * H));
  const Var cell = forget_gate * prev.cell + in_gate * candidate;
  return {out_gate * ad::tanh(cell), cell};
}

namespace {

std::size_t valid_length(std::span<const std::uint8_t> mask) {
  std::size_t n = 0;
  while (n < mask.size() && mask[n]) ++n;
  for (std::size_t j = n; j < mask.size(); ++j) {
    if (mask[j]) throw InputError("source mask must be a run of real tokens followed by padding");
  }
  return n;
}

std::vector<std::uint8_t> inverted(const std::vector<std::uint8_t>& mask) {
  std::vector<std::uint8_t> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 1;
  return out;
}

bool any_set(const std::vector<std::uint8_t>& mask) {
  for (auto m : mask) {
    if (m) return true;
  }
  return false;
}

}  // namespace

EncoderOutput encode_source(const ModelVars& vars, std::span<const TokenId> source_ids,
                            std::span<const std::uint8_t> mask) {
  const auto& config = vars.config();
  auto& tape = vars.tape();
  if (source_ids.empty()) throw InputError("encode_source: empty source");
  if (mask.size() != source_ids.size()) throw InputError("encode_source: mask length differs from source length");
  const std::size_t T = source_ids.size();
  const std::size_t L = valid_length(mask);
  if (L == 0) throw InputError("encode_source: source has no unmasked tokens");

  const Var embedding = vars["embedding.source"];
  std::vector<Var> inputs;
  inputs.reserve(L);
  for (std::size_t j = 0; j < L; ++j) {
    const TokenId id = source_ids[j];
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw InputError("encode_source: id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(config.vocab_size));
    }
    inputs.push_back(ad::row_lookup(embedding, {static_cast<std::size_t>(id)}));
  }

  const std::size_t He = config.encoder_hidden_dim;
  const Tensor zero_state({1, He});
  auto run = [&](const std::string& prefix, bool reverse) {
    std::vector<Var> states(L);
    LstmState s{tape.constant(zero_state), tape.constant(zero_state)};
    const Var w = vars[prefix + ".weight"];
    const Var b = vars[prefix + ".bias"];
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t j = reverse ? L - 1 - k : k;
      s = lstm_cell(inputs[j], s, w, b);
      states[j] = s.hidden;
    }
    return states;
  };
  const auto forward = run("encoder.forward", false);
  std::vector<Var> rows;
  rows.reserve(T);
  Var final_concat;
  if (config.bidirectional_encoder) {
    const auto backward = run("encoder.backward", true);
    for (std::size_t j = 0; j < L; ++j) {
      const Var pair[] = {forward[j], backward[j]};
      rows.push_back(ad::concat(pair, 1));
    }
    const Var ends[] = {forward[L - 1], backward[0]};
    final_concat = ad::concat(ends, 1);
  } else {
    rows = forward;
    final_concat = forward[L - 1];
  }
  if (L < T) rows.push_back(tape.constant(Tensor({T - L, config.encoder_output_dim()})));
  const Var stacked = ad::concat(rows, 0);

  EncoderOutput out;
  out.mask.assign(mask.begin(), mask.end());
  out.states = ad::add(ad::matmul(stacked, vars["encoder.projection.weight"]), vars["encoder.projection.bias"]);
  out.final_state = ad::tanh(ad::add(ad::matmul(final_concat, vars["bridge.weight"]), vars["bridge.bias"]));
  out.attention_keys = ad::matmul(out.states, vars["attention.key"]);
  if (config.use_copy) {
    out.copy_keys = ad::transpose(ad::tanh(ad::matmul(out.states, vars["copy.weight"])));
  }
  return out;
}

AttentionOutput attention(const ModelVars& vars, Var query, const EncoderOutput& enc) {
  const std::size_t T = enc.length();
  const Var projected = ad::matmul(query, vars["attention.query"]);
  const Var hidden = ad::tanh(ad::add(enc.attention_keys, projected));
  Var scores = ad::reshape(ad::matmul(hidden, vars["attention.score"]), {1, T});
  const auto pad = inverted(enc.mask);
  if (any_set(pad)) scores = ad::masked_fill(scores, pad);
  const Var weights = ad::softmax_lastdim(scores);
  return {weights, ad::matmul(weights, enc.states)};
}

DecoderState initial_decoder_state(const ModelVars& vars, const EncoderOutput& enc) {
  const std::size_t Hd = vars.config().decoder_hidden_dim;
  return {enc.final_state, vars.tape().constant(Tensor({1, Hd})), {}};
}

Var joint_distribution(Var gen_scores, Var copy_scores, std::span<const TokenId> source_outcomes,
                       std::size_t extended_size) {
  const std::size_t V = gen_scores.value().cols();
  const std::size_t T = copy_scores.value().cols();
  if (source_outcomes.size() != T) {
    throw InputError("joint_distribution: " + std::to_string(source_outcomes.size()) + " source outcomes for " +
                     std::to_string(T) + " copy scores");
  }
  std::vector<std::size_t> targets(V + T);
  for (std::size_t v = 0; v < V; ++v) targets[v] = v;
  for (std::size_t j = 0; j < T; ++j) {
    const TokenId id = source_outcomes[j];
    if (id < 0 || static_cast<std::size_t>(id) >= extended_size) {
      throw InputError("joint_distribution: source outcome " + std::to_string(id) +
                       " outside extended vocabulary of size " + std::to_string(extended_size));
    }
    targets[V + j] = static_cast<std::size_t>(id);
  }
  const Var parts[] = {gen_scores, copy_scores};
  return ad::index_add(ad::softmax_lastdim(ad::concat(parts, 1)), std::move(targets), extended_size);
}

Var selective_read(ad::Tape& tape, Var copy_scores, const EncoderOutput& enc,
                   std::span<const TokenId> source_outcomes, TokenId token, std::size_t width) {
  std::vector<std::uint8_t> other(enc.length(), 1);
  bool matched = false;
  for (std::size_t j = 0; j < enc.length(); ++j) {
    if (enc.mask[j] && source_outcomes[j] == token) {
      other[j] = 0;
      matched = true;
    }
  }
  if (!matched) return tape.constant(Tensor({1, width}));
  Var scores = copy_scores;
  if (any_set(other)) scores = ad::masked_fill(scores, std::move(other));
  return ad::matmul(ad::softmax_lastdim(scores), enc.states);
}

StepOutput decoder_step(const ModelVars& vars, const DecoderState& state, TokenId prev_token,
                        const EncoderOutput& enc, const CopySource& copy) {
  const auto& config = vars.config();
  auto& tape = vars.tape();
  const std::size_t V = config.vocab_size;
  const std::size_t Hd = config.decoder_hidden_dim;

  if (copy.source_outcomes.size() != enc.length()) {
    throw InputError("decoder_step: copy source has " + std::to_string(copy.source_outcomes.size()) +
                     " positions, encoder has " + std::to_string(enc.length()));
  }
  if (copy.extended_size < V) throw InputError("decoder_step: extended size below vocabulary size");
  if (prev_token < 0 || static_cast<std::size_t>(prev_token) >= copy.extended_size) {
    throw InputError("decoder_step: previous token " + std::to_string(prev_token) + " outside extended vocabulary of size " +
                     std::to_string(copy.extended_size));
  }

  const auto embed_id = static_cast<std::size_t>(prev_token) < V ? static_cast<std::size_t>(prev_token)
                                                                  : static_cast<std::size_t>(kUnkId);
  const Var embedded = ad::row_lookup(vars["embedding.target"], {embed_id});
  const AttentionOutput attn = attention(vars, state.hidden, enc);

  std::vector<Var> input_parts{embedded, attn.context};
  if (config.use_copy) {
    input_parts.push_back(state.copy_scores.valid()
                              ? selective_read(tape, state.copy_scores, enc, copy.source_outcomes, prev_token, Hd)
                              : tape.constant(Tensor({1, Hd})));
  }
  const Var input = ad::concat(input_parts, 1);
  const LstmState next =
      lstm_cell(input, {state.hidden, state.cell}, vars["decoder.weight"], vars["decoder.bias"]);

  const Var gen_scores = ad::add(ad::matmul(next.hidden, vars["generate.weight"]), vars["generate.bias"]);

  StepOutput out;
  out.state.hidden = next.hidden;
  out.state.cell = next.cell;
  if (!config.use_copy) {
    Var dist = ad::softmax_lastdim(gen_scores);
    if (copy.extended_size > V) {
      const Var parts[] = {dist, tape.constant(Tensor({1, copy.extended_size - V}))};
      dist = ad::concat(parts, 1);
    }
    out.distribution = dist;
    return out;
  }

  Var copy_scores = ad::matmul(next.hidden, enc.copy_keys);
  const auto pad = inverted(enc.mask);
  if (any_set(pad)) copy_scores = ad::masked_fill(copy_scores, pad);
  // PAD positions carry exactly zero mass, so any in-range outcome id will do.
  std::vector<TokenId> outcomes(copy.source_outcomes.begin(), copy.source_outcomes.end());
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    if (!enc.mask[j]) outcomes[j] = kPadId;
  }
  out.distribution = joint_distribution(gen_scores, copy_scores, outcomes, copy.extended_size);
  out.state.copy_scores = copy_scores;
  return out;
}

}  // namespace headline
