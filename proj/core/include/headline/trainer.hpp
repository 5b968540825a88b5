#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "headline/autodiff.hpp"
#include "headline/checkpoint.hpp"
#include "headline/corpus.hpp"
#include "headline/model.hpp"

namespace headline {

struct TrainConfig {
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::uint64_t seed = 1;
  std::size_t batch_tokens = 4000;
  double max_seconds = 0.0;  // wall-clock budget checked between epochs; 0 = none

  void validate() const;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// -(1/T) sum_t ln max(p_t(y_t), 1e-12) over positions whose target is not PAD.
ad::Var nll_loss(std::span<const ad::Var> step_distributions, std::span<const TokenId> targets);

struct SequenceLoss {
  ad::Var total;  // summed negative log-likelihood
  std::size_t tokens = 0;
};

/// Teacher-forced pass over one example: step t consumes extended target
/// t-1 and is scored on extended target t.
SequenceLoss teacher_forced_loss(const ModelVars& vars, const EncodedExample& example);

struct AdamState {
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
  std::uint64_t step = 0;
};

/// Clips the gradients to a global L2 norm of config.clip_norm, then applies a
/// bias-corrected Adam update. Returns the pre-clipping global norm.
double adam_step(std::map<std::string, Tensor>& params, const ad::GradientMap& grads, AdamState& state,
                 const TrainConfig& config);

/// Mean per-token teacher-forced NLL with parameters held fixed.
double evaluate_loss(const ModelParams& params, std::span<const EncodedExample> examples);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::string stop_reason;  // "patience", "max_epochs", "time_budget"
};

struct TrainerState {
  ModelParams params;
  ModelParams best_params;
  AdamState adam;
  TrainReport report;
  std::size_t epochs_without_improvement = 0;

  std::size_t epochs_completed() const { return report.epochs.size(); }
};

TrainerState start_training(const ModelConfig& config);

using EpochCallback = std::function<void(const TrainerState&, const EpochMetrics&)>;

/// Runs epochs until patience, max_epochs or the time budget stops it.
/// Continues from whatever epoch `state` has reached, so a restored state
/// resumes the same trajectory. Best = lowest val loss, earliest on ties.
void train(TrainerState& state, std::span<const EncodedExample> train_set, std::span<const EncodedExample> val_set,
           const TrainConfig& config, const EpochCallback& on_epoch = {});

TrainerState train(const ModelConfig& model_config, std::span<const EncodedExample> train_set,
                   std::span<const EncodedExample> val_set, const TrainConfig& config);

/// Optimizer moments, best parameters and the report go into the
/// checkpoint's extra tensors and metadata.
void store_trainer_state(const TrainerState& state, Checkpoint& checkpoint);
TrainerState restore_trainer_state(const Checkpoint& checkpoint);

}  // namespace headline
