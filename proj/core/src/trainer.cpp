#include "headline/trainer.hpp"

#include <chrono>
#include <cmath>

#include "headline/error.hpp"
#include "headline/random.hpp"
#include "json.hpp"

namespace headline {

using ad::Var;
using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("train.learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InputError("train.adam_beta1/2 must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InputError("train.adam_eps must be positive");
  if (!(clip_norm > 0.0)) throw InputError("train.clip_norm must be positive");
  if (patience < 1) throw InputError("train.patience must be at least 1");
  if (max_epochs < 1) throw InputError("train.max_epochs must be at least 1");
  if (batch_tokens < 1) throw InputError("train.batch_tokens must be positive");
}

namespace {

Var negative_log_sum(std::span<const Var> picks) {
  return ad::scale(ad::sum(ad::log(ad::concat(picks, 1), kProbabilityFloor)), -1.0);
}

const std::vector<TokenId>& decoder_sequence(const ModelConfig& config, const EncodedExample& ex) {
  // The copy model is trained against extended ids; without a copy head an
  // OOV target can only be predicted as UNK.
  return config.use_copy ? ex.extended_target_ids : ex.target_ids;
}

}  // namespace

Var nll_loss(std::span<const Var> step_distributions, std::span<const TokenId> targets) {
  if (step_distributions.size() != targets.size()) {
    throw InputError("nll_loss: " + std::to_string(step_distributions.size()) + " distributions for " +
                     std::to_string(targets.size()) + " targets");
  }
  std::vector<Var> picks;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] == kPadId) continue;
    const std::size_t support = step_distributions[t].value().size();
    if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= support) {
      throw InputError("nll_loss: target " + std::to_string(targets[t]) + " at step " + std::to_string(t) +
                       " outside distribution support " + std::to_string(support));
    }
    picks.push_back(ad::pick(step_distributions[t], static_cast<std::size_t>(targets[t])));
  }
  if (picks.empty()) throw InputError("nll_loss: no non-PAD targets");
  return ad::scale(negative_log_sum(picks), 1.0 / static_cast<double>(picks.size()));
}

SequenceLoss teacher_forced_loss(const ModelVars& vars, const EncodedExample& example) {
  const auto& sequence = decoder_sequence(vars.config(), example);
  if (sequence.size() < 2) throw InputError("teacher_forced_loss: example has no target tokens");
  const std::vector<std::uint8_t> mask(example.source_ids.size(), 1);
  const EncoderOutput enc = encode_source(vars, example.source_ids, mask);
  const CopySource copy{example.source_extended_ids, example.extended_size()};

  DecoderState state = initial_decoder_state(vars, enc);
  std::vector<Var> picks;
  for (std::size_t t = 1; t < sequence.size(); ++t) {
    StepOutput step = decoder_step(vars, state, sequence[t - 1], enc, copy);
    state = step.state;
    if (sequence[t] == kPadId) continue;
    if (sequence[t] < 0 || static_cast<std::size_t>(sequence[t]) >= copy.extended_size) {
      throw InputError("teacher_forced_loss: target " + std::to_string(sequence[t]) + " outside extended vocabulary");
    }
    picks.push_back(ad::pick(step.distribution, static_cast<std::size_t>(sequence[t])));
  }
  return {negative_log_sum(picks), picks.size()};
}

double adam_step(std::map<std::string, Tensor>& params, const ad::GradientMap& grads, AdamState& state,
                 const TrainConfig& config) {
  double norm_sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (double v : g.data()) {
      if (!std::isfinite(v)) throw Error("non-finite gradient in parameter '" + name + "'");
      norm_sq += v * v;
    }
  }
  const double norm = std::sqrt(norm_sq);
  const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;

  ++state.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  for (auto& [name, param] : params) {
    auto git = grads.find(name);
    const std::size_t n = param.size();
    auto& m_tensor = state.first_moment.try_emplace(name, Tensor(param.shape())).first->second;
    auto& v_tensor = state.second_moment.try_emplace(name, Tensor(param.shape())).first->second;
    if (git != grads.end() && git->second.shape() != param.shape()) {
      throw InputError("gradient for '" + name + "' has shape " + shape_to_string(git->second.shape()) +
                       ", parameter has " + shape_to_string(param.shape()));
    }
    std::vector<double> p(param.data().begin(), param.data().end());
    std::vector<double> m(m_tensor.data().begin(), m_tensor.data().end());
    std::vector<double> v(v_tensor.data().begin(), v_tensor.data().end());
    for (std::size_t i = 0; i < n; ++i) {
      const double g = git == grads.end() ? 0.0 : git->second[i] * clip;
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
    param = Tensor(param.shape(), std::move(p));
    m_tensor = Tensor(param.shape(), std::move(m));
    v_tensor = Tensor(param.shape(), std::move(v));
  }
  return norm;
}

double evaluate_loss(const ModelParams& params, std::span<const EncodedExample> examples) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : examples) {
    ad::Tape tape;
    const ModelVars vars(tape, params, /*trainable=*/false);
    const SequenceLoss loss = teacher_forced_loss(vars, ex);
    total += loss.total.value().item();
    tokens += loss.tokens;
  }
  if (tokens == 0) throw InputError("evaluate_loss: no target tokens");
  return total / static_cast<double>(tokens);
}

TrainerState start_training(const ModelConfig& config) {
  TrainerState state;
  state.params = init_params(config);
  state.best_params = state.params;
  return state;
}

namespace {

struct BatchGradients {
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  ad::GradientMap grads;
};

BatchGradients batch_gradients(const ModelParams& params, std::span<const EncodedExample> examples,
                               const Batch& batch) {
  std::map<std::string, std::vector<double>> acc;
  BatchGradients out;
  for (std::size_t idx : batch.example_indices) {
    ad::Tape tape;
    const ModelVars vars(tape, params, /*trainable=*/true);
    const SequenceLoss loss = teacher_forced_loss(vars, examples[idx]);
    out.loss_sum += loss.total.value().item();
    out.tokens += loss.tokens;
    for (auto& [name, g] : tape.backward(loss.total)) {
      auto& buf = acc[name];
      if (buf.empty()) buf.assign(g.size(), 0.0);
      auto d = g.data();
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += d[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(out.tokens);
  for (auto& [name, buf] : acc) {
    for (auto& v : buf) v *= inv;
    out.grads.emplace(name, Tensor(params.at(name).shape(), std::move(buf)));
  }
  return out;
}

}  // namespace

void train(TrainerState& state, std::span<const EncodedExample> train_set, std::span<const EncodedExample> val_set,
           const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InputError("train: training set is empty");
  if (val_set.empty()) throw InputError("train: validation set is empty");

  const auto started = std::chrono::steady_clock::now();
  state.report.stop_reason.clear();
  while (true) {
    if (state.epochs_completed() >= config.max_epochs) {
      state.report.stop_reason = "max_epochs";
      return;
    }
    if (!state.report.epochs.empty() && state.epochs_without_improvement >= config.patience) {
      state.report.stop_reason = "patience";
      return;
    }
    const std::size_t epoch = state.epochs_completed() + 1;
    const auto batches = make_batches(train_set, config.batch_tokens, mix_seed(config.seed, epoch));

    double loss_sum = 0.0;
    std::size_t tokens = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      BatchGradients g = batch_gradients(state.params, train_set, batches[b]);
      if (!std::isfinite(g.loss_sum)) {
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                    std::to_string(b));
      }
      loss_sum += g.loss_sum;
      tokens += g.tokens;
      adam_step(state.params.tensors, g.grads, state.adam, config);
    }

    EpochMetrics metrics{epoch, loss_sum / static_cast<double>(tokens), evaluate_loss(state.params, val_set)};
    state.report.epochs.push_back(metrics);
    if (state.report.epochs.size() == 1 || metrics.val_loss < state.report.best_val_loss) {
      state.report.best_epoch = epoch;
      state.report.best_val_loss = metrics.val_loss;
      state.best_params = state.params;
      state.epochs_without_improvement = 0;
    } else {
      ++state.epochs_without_improvement;
    }
    if (on_epoch) on_epoch(state, metrics);

    if (config.max_seconds > 0.0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      if (elapsed.count() >= config.max_seconds) {
        state.report.stop_reason = "time_budget";
        return;
      }
    }
  }
}

TrainerState train(const ModelConfig& model_config, std::span<const EncodedExample> train_set,
                   std::span<const EncodedExample> val_set, const TrainConfig& config) {
  TrainerState state = start_training(model_config);
  train(state, train_set, val_set, config);
  return state;
}

void store_trainer_state(const TrainerState& state, Checkpoint& checkpoint) {
  checkpoint.params = state.params;
  for (const auto& [name, t] : state.adam.first_moment) checkpoint.extra_tensors["adam.m/" + name] = t;
  for (const auto& [name, t] : state.adam.second_moment) checkpoint.extra_tensors["adam.v/" + name] = t;
  for (const auto& [name, t] : state.best_params.tensors) checkpoint.extra_tensors["best/" + name] = t;

  json epochs = json::array();
  for (const auto& e : state.report.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  }
  json meta = json::parse(checkpoint.metadata_json);
  meta["trainer"] = {
      {"adam_step", state.adam.step},
      {"epochs_without_improvement", state.epochs_without_improvement},
      {"best_epoch", state.report.best_epoch},
      {"best_val_loss", state.report.best_val_loss},
      {"stop_reason", state.report.stop_reason},
      {"epochs", epochs},
  };
  checkpoint.metadata_json = meta.dump();
}

TrainerState restore_trainer_state(const Checkpoint& checkpoint) {
  const json meta = json::parse(checkpoint.metadata_json);
  if (!meta.contains("trainer")) throw InputError("checkpoint has no saved optimizer state; cannot resume");
  const json& tr = meta.at("trainer");

  TrainerState state;
  state.params = checkpoint.params;
  state.best_params.config = checkpoint.params.config;
  for (const auto& [key, t] : checkpoint.extra_tensors) {
    if (key.starts_with("adam.m/")) state.adam.first_moment.emplace(key.substr(7), t);
    else if (key.starts_with("adam.v/")) state.adam.second_moment.emplace(key.substr(7), t);
    else if (key.starts_with("best/")) state.best_params.tensors.emplace(key.substr(5), t);
  }
  if (state.best_params.tensors.size() != state.params.tensors.size()) {
    throw InputError("checkpoint trainer state is incomplete: best parameters missing");
  }
  state.adam.step = tr.at("adam_step").get<std::uint64_t>();
  state.epochs_without_improvement = tr.at("epochs_without_improvement").get<std::size_t>();
  state.report.best_epoch = tr.at("best_epoch").get<std::size_t>();
  state.report.best_val_loss = tr.at("best_val_loss").get<double>();
  state.report.stop_reason = tr.at("stop_reason").get<std::string>();
  for (const auto& e : tr.at("epochs")) {
    state.report.epochs.push_back(
        {e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(), e.at("val_loss").get<double>()});
  }
  return state;
}

}  // namespace headline
