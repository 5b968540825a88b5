#include <gtest/gtest.h>

#include <cmath>

#include "headline/autodiff.hpp"
#include "headline/grad_check.hpp"
#include "headline/model.hpp"
#include "headline/random.hpp"

namespace headline::ad {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = rng.uniform(-scale, scale);
  return Tensor(std::move(shape), std::move(v));
}

double check(const LossBuilder& build, const std::map<std::string, Tensor>& params) {
  return grad_check(build, params, 1e-5).max_relative_error;
}

TEST(Forward, SoftmaxOfEqualScoresIsUniform) {
  Tape tape;
  const auto p = softmax_lastdim(tape.constant(Tensor::row({0, 0, 0}))).value();
  for (double x : p.data()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(Forward, SoftmaxOfOneTwo) {
  // 1/(1+e) and e/(1+e), evaluated to 16 digits.
  Tape tape;
  const auto p = softmax_lastdim(tape.constant(Tensor::row({1, 2}))).value();
  EXPECT_NEAR(p[0], 0.2689414213699951, 1e-15);
  EXPECT_NEAR(p[1], 0.7310585786300049, 1e-15);
}

TEST(Forward, SigmoidAndTanhFixedPoints) {
  Tape tape;
  const Var zero = tape.constant(Tensor::row({0}));
  EXPECT_EQ(sigmoid(zero).value()[0], 0.5);
  EXPECT_EQ(tanh(zero).value()[0], 0.0);
}

TEST(Forward, IdentityMatmul) {
  Tape tape;
  const Tensor a = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6});
  const Tensor eye = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_EQ(matmul(tape.constant(eye), tape.constant(a)).value(), a);
}

TEST(Forward, MatmulByHand) {
  Tape tape;
  const auto c = matmul(tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})),
                        tape.constant(Tensor::matrix(2, 1, {5, 6})))
                     .value();
  EXPECT_EQ(c.shape(), (Shape{2, 1}));
  EXPECT_EQ(c[0], 17);
  EXPECT_EQ(c[1], 39);
}

TEST(Forward, RowBroadcastAdd) {
  Tape tape;
  const auto c = add(tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4})), tape.constant(Tensor::row({10, 20}))).value();
  EXPECT_EQ(c, Tensor::matrix(2, 2, {11, 22, 13, 24}));
}

TEST(Forward, MaskedFillWritesLargeNegative) {
  Tape tape;
  const auto p = softmax_lastdim(masked_fill(tape.constant(Tensor::row({3, 1, 2})), {0, 1, 0})).value();
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[0] + p[2], 1.0, 1e-15);
}

TEST(Forward, LogFloor) {
  Tape tape;
  const auto y = log(tape.constant(Tensor::row({0.0, 1.0})), 1e-12).value();
  EXPECT_NEAR(y[0], std::log(1e-12), 1e-12);
  EXPECT_EQ(y[1], 0.0);
}

TEST(Forward, IndexAddPoolsColumns) {
  Tape tape;
  const auto y = index_add(tape.constant(Tensor::row({1, 2, 3})), {2, 0, 2}, 4).value();
  EXPECT_EQ(y, Tensor::row({2, 0, 4, 0}));
}

TEST(Backward, SumGivesOnes) {
  Tape tape;
  const Var p = tape.parameter("p", Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  const auto g = tape.backward(sum(p));
  EXPECT_EQ(g.at("p"), Tensor::full({2, 3}, 1.0));
}

TEST(Backward, SquareGivesTwiceValue) {
  Tape tape;
  const Var p = tape.parameter("p", Tensor::row({3}));
  EXPECT_EQ(tape.backward(sum(p * p)).at("p")[0], 6.0);
}

TEST(Backward, UnusedParameterGetsZeros) {
  Tape tape;
  const Var p = tape.parameter("p", Tensor::row({1, 2}));
  tape.parameter("unused", Tensor::row({5, 6, 7}));
  const auto g = tape.backward(sum(p));
  EXPECT_EQ(g.at("unused"), Tensor::full({1, 3}, 0.0));
}

TEST(Backward, ReusedParameterAccumulates) {
  Tape tape;
  const Var p = tape.parameter("p", Tensor::row({2}));
  // d/dp (p + 3p) = 4
  EXPECT_EQ(tape.backward(sum(p + scale(p, 3.0))).at("p")[0], 4.0);
}

TEST(Backward, NonScalarLossFails) {
  Tape tape;
  const Var p = tape.parameter("p", Tensor::row({1, 2}));
  EXPECT_THROW(tape.backward(p), std::invalid_argument);
}

TEST(Errors, MatmulNamesBothShapes) {
  Tape tape;
  try {
    matmul(tape.constant(Tensor({2, 3})), tape.constant(Tensor({2, 3})));
    FAIL() << "expected a shape error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("matmul"), std::string::npos) << msg;
  }
}

TEST(Errors, RowLookupOutOfRangeNamesIndexAndExtent) {
  Tape tape;
  try {
    row_lookup(tape.constant(Tensor({4, 2})), {1, 7});
    FAIL() << "expected a range error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('7'), std::string::npos) << msg;
    EXPECT_NE(msg.find('4'), std::string::npos) << msg;
  }
}

TEST(Errors, AddShapeMismatch) {
  Tape tape;
  EXPECT_THROW(add(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 2}))), std::invalid_argument);
}

TEST(GradCheck, LinearModelIsExactToRounding) {
  const double err = check(
      [](Tape&, const ParameterVars& p) {
        return sum(mul(p.at("w"), p.at("x")));
      },
      {{"w", Tensor::row({0.3, -1.2, 2.5})}, {"x", Tensor::row({1.5, 0.25, -0.75})}});
  EXPECT_LT(err, 1e-10);
}

TEST(GradCheck, TwoLayerTanhNetwork) {
  Rng rng(3);
  const std::map<std::string, Tensor> params = {{"x", random_tensor({3, 4}, rng)},
                                                {"w1", random_tensor({4, 5}, rng)},
                                                {"b1", random_tensor({1, 5}, rng)},
                                                {"w2", random_tensor({5, 2}, rng)}};
  const double err = check(
      [](Tape&, const ParameterVars& p) {
        const Var h = tanh(add(matmul(p.at("x"), p.at("w1")), p.at("b1")));
        return sum(tanh(matmul(h, p.at("w2"))));
      },
      params);
  EXPECT_LT(err, 1e-4);
}

TEST(GradCheck, LstmCellHiddenFour) {
  Rng rng(4);
  const std::map<std::string, Tensor> params = {{"x", random_tensor({1, 3}, rng)},
                                                {"h", random_tensor({1, 4}, rng)},
                                                {"c", random_tensor({1, 4}, rng)},
                                                {"w", random_tensor({7, 16}, rng)},
                                                {"b", random_tensor({1, 16}, rng)}};
  const double err = check(
      [](Tape&, const ParameterVars& p) {
        const LstmState s = lstm_cell(p.at("x"), {p.at("h"), p.at("c")}, p.at("w"), p.at("b"));
        return sum(s.hidden * s.cell);
      },
      params);
  EXPECT_LT(err, 1e-4);
}

// Every op's backward rule against finite differences, composed with a
// random weighting so no gradient is trivially uniform.
class OpGradient : public ::testing::TestWithParam<std::string> {};

TEST_P(OpGradient, MatchesFiniteDifferences) {
  Rng rng(17);
  const std::map<std::string, Tensor> params = {
      {"a", random_tensor({3, 4}, rng)}, {"b", random_tensor({3, 4}, rng)}, {"r", random_tensor({1, 4}, rng)},
      {"m", random_tensor({4, 2}, rng)}, {"w", random_tensor({3, 4}, rng)}};
  const std::string op = GetParam();
  const auto weighted = [](Var x, Var w) { return sum(mul(x, w)); };
  const double err = check(
      [&](Tape& tape, const ParameterVars& p) -> Var {
        const Var a = p.at("a"), b = p.at("b"), w = p.at("w");
        if (op == "matmul") return sum(tanh(matmul(a, p.at("m"))));
        if (op == "add") return weighted(tanh(add(a, b)), w);
        if (op == "broadcast") return weighted(tanh(add(a, p.at("r"))), w);
        if (op == "mul") return weighted(mul(a, b), w);
        if (op == "scale") return weighted(scale(a, -2.5), w);
        if (op == "sigmoid") return weighted(sigmoid(a), w);
        if (op == "tanh") return weighted(tanh(a), w);
        if (op == "softmax") return weighted(softmax_lastdim(a), w);
        if (op == "log") return weighted(log(add(mul(a, a), tape.constant(Tensor::full({3, 4}, 0.5)))), w);
        if (op == "masked") {
          return weighted(softmax_lastdim(masked_fill(a, {0, 1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0})), w);
        }
        if (op == "transpose") return sum(tanh(matmul(transpose(a), b)));
        if (op == "reshape") return weighted(reshape(tanh(reshape(a, {4, 3})), {3, 4}), w);
        if (op == "slice") return sum(tanh(slice_cols(a, 1, 3)));
        if (op == "concat0") {
          const Var parts[] = {a, b};
          return sum(tanh(matmul(concat(parts, 0), p.at("m"))));
        }
        if (op == "concat1") {
          const Var parts[] = {a, b};
          return sum(tanh(concat(parts, 1)));
        }
        if (op == "row_lookup") return sum(tanh(row_lookup(a, {2, 0, 2, 1})));
        if (op == "index_add") return sum(tanh(index_add(a, {1, 1, 0, 3}, 5)));
        if (op == "pick") return mul(pick(softmax_lastdim(a), 6), pick(b, 3));
        throw std::logic_error("unknown op " + op);
      },
      params);
  EXPECT_LT(err, 1e-4) << op;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient,
                         ::testing::Values("matmul", "add", "broadcast", "mul", "scale", "sigmoid", "tanh", "softmax",
                                           "log", "masked", "transpose", "reshape", "slice", "concat0", "concat1",
                                           "row_lookup", "index_add", "pick"));

TEST(Properties, SoftmaxIsADistributionForAnyFiniteInput) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    const double range = trial % 2 ? 1e3 : 5.0;
    const auto p = softmax_lastdim(tape.constant(random_tensor({3, 1 + rng.below(12)}, rng, range))).value();
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < p.cols(); ++c) {
        EXPECT_GE(p.at(r, c), 0.0);
        s += p.at(r, c);
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Properties, ReplayIsBitExact) {
  Rng rng(21);
  Tape tape;
  const Var a = tape.parameter("a", random_tensor({2, 3}, rng));
  const Var m = tape.constant(random_tensor({3, 3}, rng));
  const Var y = softmax_lastdim(tanh(matmul(a, m)));
  pick(log(y, 1e-12), 2);
  const auto replayed = tape.replay();
  ASSERT_EQ(replayed.size(), tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i) EXPECT_EQ(replayed[i], tape.node(i).value) << "node " << i;
}

TEST(Properties, InputsPrecedeConsumers) {
  Tape tape;
  const Var a = tape.parameter("a", Tensor::row({1, 2}));
  sum(tanh(a * a));
  for (std::size_t i = 0; i < tape.size(); ++i) {
    for (std::size_t in : tape.node(i).inputs) EXPECT_LT(in, i);
  }
}

TEST(Properties, ForwardIsDeterministic) {
  const auto run = [] {
    Rng rng(5);
    Tape tape;
    return softmax_lastdim(matmul(tape.constant(random_tensor({4, 6}, rng)), tape.constant(random_tensor({6, 3}, rng))))
        .value();
  };
  EXPECT_EQ(run(), run());
}

TEST(Properties, MaskedSoftmaxGradientsStayFinite) {
  Tape tape;
  const Var a = tape.parameter("a", Tensor::row({1, 2, 3}));
  const auto g = tape.backward(pick(log(softmax_lastdim(masked_fill(a, {1, 0, 1})), 1e-12), 1));
  EXPECT_TRUE(g.at("a").all_finite());
}

}  // namespace
}  // namespace headline::ad
