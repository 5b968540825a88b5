#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "headline/checkpoint.hpp"
#include "headline/error.hpp"
#include "headline/trainer.hpp"
#include "support.hpp"

namespace headline {
namespace {

using testing::make_example;

ModelConfig tiny_config() {
  ModelConfig c;
  c.vocab_size = 10;
  c.embedding_dim = 4;
  c.encoder_hidden_dim = 4;
  c.decoder_hidden_dim = 4;
  return c;
}

std::vector<EncodedExample> toy_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EncodedExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TokenId> src;
    const std::size_t len = 3 + rng.below(3);
    for (std::size_t k = 0; k < len; ++k) src.push_back(static_cast<TokenId>(4 + rng.below(6)));
    out.push_back(make_example(10, src, {src[0], src[1]}));
  }
  return out;
}

TrainConfig quick_config() {
  TrainConfig t;
  t.learning_rate = 0.02;
  t.batch_tokens = 12;
  t.max_epochs = 4;
  t.patience = 10;
  return t;
}

TEST(NllLoss, UniformOverFour) {
  ad::Tape tape;
  const std::vector<ad::Var> d{tape.constant(Tensor::row({0.25, 0.25, 0.25, 0.25}))};
  const std::vector<TokenId> y{2};
  EXPECT_NEAR(nll_loss(d, y).value().item(), 1.3862943611198906, 1e-12);
}

TEST(NllLoss, MeanOverSteps) {
  ad::Tape tape;
  const std::vector<ad::Var> d{tape.constant(Tensor::row({0.5, 0.5})),
                               tape.constant(Tensor::row({0.25, 0.25, 0.25, 0.25}))};
  const std::vector<TokenId> y{1, 3};
  EXPECT_NEAR(nll_loss(d, y).value().item(), 1.0397207708399179, 1e-12);
}

TEST(NllLoss, CertainTargetIsZero) {
  ad::Tape tape;
  const std::vector<ad::Var> d{tape.constant(Tensor::row({0.0, 1.0}))};
  const std::vector<TokenId> y{1};
  EXPECT_EQ(nll_loss(d, y).value().item(), 0.0);
}

TEST(NllLoss, ZeroProbabilityIsFloored) {
  ad::Tape tape;
  const std::vector<ad::Var> d{tape.constant(Tensor::row({0.5, 0.5, 0.0}))};
  const std::vector<TokenId> y{2};
  EXPECT_NEAR(nll_loss(d, y).value().item(), -std::log(kProbabilityFloor), 1e-9);
}

TEST(NllLoss, PadTargetsAreSkipped) {
  ad::Tape tape;
  const std::vector<ad::Var> d{tape.constant(Tensor::row({0.5, 0.5, 0.0})),
                               tape.constant(Tensor::row({0.9, 0.05, 0.05}))};
  const std::vector<TokenId> y{1, kPadId};
  EXPECT_NEAR(nll_loss(d, y).value().item(), std::log(2.0), 1e-12);
  const std::vector<TokenId> all_pad{kPadId, kPadId};
  EXPECT_THROW(nll_loss(d, all_pad), InputError);
}

TEST(NllLoss, RejectsOutOfSupportTarget) {
  ad::Tape tape;
  const std::vector<ad::Var> d{tape.constant(Tensor::row({0.5, 0.5}))};
  const std::vector<TokenId> y{5};
  EXPECT_THROW(nll_loss(d, y), InputError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::map<std::string, Tensor> params{{"w", Tensor::row({1.0, -2.0, 3.0})}};
  const ad::GradientMap grads{{"w", Tensor::row({0.5, -0.25, 0.0})}};
  AdamState state;
  TrainConfig config;
  adam_step(params, grads, state, config);
  EXPECT_NEAR(params.at("w")[0], 1.0 - 0.001, 1e-9);
  EXPECT_NEAR(params.at("w")[1], -2.0 + 0.001, 1e-9);
  EXPECT_EQ(params.at("w")[2], 3.0);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::map<std::string, Tensor> params{{"w", Tensor::row({0.3, 0.4})}};
  AdamState state;
  adam_step(params, {{"w", Tensor::row({0.0, 0.0})}}, state, TrainConfig{});
  EXPECT_EQ(params.at("w"), Tensor::row({0.3, 0.4}));
  adam_step(params, {}, state, TrainConfig{});
  EXPECT_EQ(params.at("w"), Tensor::row({0.3, 0.4}));
}

TEST(Adam, ClipsToGlobalNorm) {
  // Global norm 20 against a clip of 10 halves every gradient, which shows in
  // the first moment: (1 - beta1) * g / 2.
  std::map<std::string, Tensor> params{{"a", Tensor::row({0.0})}, {"b", Tensor::row({0.0})}};
  const ad::GradientMap grads{{"a", Tensor::row({12.0})}, {"b", Tensor::row({16.0})}};
  AdamState state;
  TrainConfig config;
  config.clip_norm = 10.0;
  EXPECT_DOUBLE_EQ(adam_step(params, grads, state, config), 20.0);
  EXPECT_NEAR(state.first_moment.at("a")[0], 0.1 * 6.0, 1e-12);
  EXPECT_NEAR(state.first_moment.at("b")[0], 0.1 * 8.0, 1e-12);
}

TEST(Adam, NonFiniteGradientFails) {
  std::map<std::string, Tensor> params{{"w", Tensor::row({0.0})}};
  AdamState state;
  EXPECT_THROW(adam_step(params, {{"w", Tensor::row({std::nan("")})}}, state, TrainConfig{}), Error);
}

TEST(TrainConfigCheck, RejectsBadValues) {
  TrainConfig t;
  t.learning_rate = 0.0;
  EXPECT_THROW(t.validate(), InputError);
  t = TrainConfig{};
  t.patience = 0;
  EXPECT_THROW(t.validate(), InputError);
  t = TrainConfig{};
  t.adam_beta2 = 1.0;
  EXPECT_THROW(t.validate(), InputError);
}

TEST(TeacherForcing, CountsTargetTokensIncludingEos) {
  const ModelConfig c = tiny_config();
  const ModelParams p = init_params(c);
  ad::Tape tape;
  const ModelVars vars(tape, p, false);
  const SequenceLoss loss = teacher_forced_loss(vars, make_example(10, {4, 5, 6}, {5, 6, 7}));
  EXPECT_EQ(loss.tokens, 4u);
  EXPECT_GT(loss.total.value().item(), 0.0);
}

TEST(TeacherForcing, OovTargetNeedsCopyHead) {
  // With copy the OOV target is scored at its extended id; without, as UNK.
  ModelConfig c = tiny_config();
  const EncodedExample ex = make_example(10, {4, 10, 6}, {10});
  for (bool copy : {true, false}) {
    c.use_copy = copy;
    const ModelParams p = init_params(c);
    const double loss = evaluate_loss(p, std::span(&ex, 1));
    EXPECT_TRUE(std::isfinite(loss));
    EXPECT_LT(loss, 10.0);
  }
}

TEST(Training, LossDecreasesOnToyData) {
  const auto train_set = toy_set(12, 1);
  TrainConfig t = quick_config();
  t.max_epochs = 8;
  const TrainerState state = train(tiny_config(), train_set, train_set, t);
  ASSERT_EQ(state.report.epochs.size(), 8u);
  EXPECT_LT(state.report.epochs.back().train_loss, state.report.epochs.front().train_loss);
  EXPECT_EQ(state.report.stop_reason, "max_epochs");
}

TEST(Training, Deterministic) {
  const auto train_set = toy_set(10, 2);
  const auto val_set = toy_set(4, 3);
  const TrainerState a = train(tiny_config(), train_set, val_set, quick_config());
  const TrainerState b = train(tiny_config(), train_set, val_set, quick_config());
  EXPECT_EQ(a.params.tensors, b.params.tensors);
  for (std::size_t i = 0; i < a.report.epochs.size(); ++i) {
    EXPECT_EQ(a.report.epochs[i].val_loss, b.report.epochs[i].val_loss);
  }
}

TEST(Training, BestIsEarliestMinimumAndPatienceStops) {
  const auto train_set = toy_set(10, 4);
  const auto val_set = toy_set(4, 5);
  TrainConfig t = quick_config();
  t.learning_rate = 0.5;  // large steps make the validation curve bounce
  t.patience = 2;
  t.max_epochs = 40;
  const TrainerState s = train(tiny_config(), train_set, val_set, t);
  const auto& epochs = s.report.epochs;
  const auto best = std::min_element(epochs.begin(), epochs.end(),
                                     [](const auto& a, const auto& b) { return a.val_loss < b.val_loss; });
  EXPECT_EQ(s.report.best_epoch, best->epoch);
  EXPECT_EQ(s.report.best_val_loss, best->val_loss);
  EXPECT_DOUBLE_EQ(evaluate_loss(s.best_params, val_set), best->val_loss);
  if (s.report.stop_reason == "patience") {
    EXPECT_EQ(epochs.size(), s.report.best_epoch + 2);
  } else {
    EXPECT_EQ(s.report.stop_reason, "max_epochs");
    EXPECT_EQ(epochs.size(), 40u);
  }
}

TEST(Training, EvaluationDoesNotChangeParameters) {
  const ModelParams p = init_params(tiny_config());
  const ModelParams before = p;
  const auto val = toy_set(3, 6);
  const double a = evaluate_loss(p, val);
  EXPECT_EQ(evaluate_loss(p, val), a);
  EXPECT_EQ(p.tensors, before.tensors);
}

TEST(Training, EmptySetsFail) {
  const auto some = toy_set(2, 7);
  EXPECT_THROW(train(tiny_config(), {}, some, quick_config()), InputError);
  EXPECT_THROW(train(tiny_config(), some, {}, quick_config()), InputError);
}

TEST(Training, ResumeMatchesUninterruptedRun) {
  const auto train_set = toy_set(10, 8);
  const auto val_set = toy_set(4, 9);
  const TrainConfig t = quick_config();
  const TrainerState straight = train(tiny_config(), train_set, val_set, t);

  TrainConfig half = t;
  half.max_epochs = 2;
  TrainerState first = train(tiny_config(), train_set, val_set, half);
  Checkpoint ck;
  store_trainer_state(first, ck);
  TrainerState resumed = restore_trainer_state(parse_checkpoint(serialize_checkpoint(ck)));
  train(resumed, train_set, val_set, t);

  EXPECT_EQ(resumed.params.tensors, straight.params.tensors);
  EXPECT_EQ(resumed.best_params.tensors, straight.best_params.tensors);
  EXPECT_EQ(resumed.adam.step, straight.adam.step);
  ASSERT_EQ(resumed.report.epochs.size(), straight.report.epochs.size());
  for (std::size_t i = 0; i < straight.report.epochs.size(); ++i) {
    EXPECT_EQ(resumed.report.epochs[i].val_loss, straight.report.epochs[i].val_loss);
  }
}

TEST(Training, RestoreWithoutTrainerStateFails) {
  Checkpoint ck;
  ck.params = init_params(tiny_config());
  EXPECT_THROW(restore_trainer_state(ck), InputError);
}

}  // namespace
}  // namespace headline
