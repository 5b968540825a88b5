#include <benchmark/benchmark.h>

#include "headline/bpe.hpp"
#include "headline/corpus.hpp"
#include "headline/decoder.hpp"
#include "headline/metrics.hpp"
#include "headline/random.hpp"

namespace headline {
namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor({rows, cols}, std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) {
    ad::Tape tape;
    benchmark::DoNotOptimize(ad::matmul(tape.constant(a), tape.constant(b)).value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_LstmStepWithBackward(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const Tensor w = random_matrix(2 * h, 4 * h, 3), b = random_matrix(1, 4 * h, 4), x = random_matrix(1, h, 5);
  for (auto _ : state) {
    ad::Tape tape;
    const LstmState prev{tape.constant(Tensor({1, h})), tape.constant(Tensor({1, h}))};
    const LstmState next = lstm_cell(tape.constant(x), prev, tape.parameter("w", w), tape.parameter("b", b));
    benchmark::DoNotOptimize(tape.backward(ad::sum(next.hidden)));
  }
}
BENCHMARK(BM_LstmStepWithBackward)->Arg(64)->Arg(256);

void BM_BeamDecode(benchmark::State& state) {
  ModelConfig c;
  c.vocab_size = 2000;
  c.embedding_dim = 32;
  c.encoder_hidden_dim = 32;
  c.decoder_hidden_dim = 64;
  const ModelParams p = init_params(c);
  EncodedExample ex;
  ex.oov_map = OovMap(c.vocab_size);
  for (TokenId i = 0; i < 60; ++i) {
    ex.source_ids.push_back(4 + i);
    ex.source_extended_ids.push_back(4 + i);
    ex.source_tokens.push_back("t");
  }
  const BeamConfig beam{static_cast<std::size_t>(state.range(0)), 10, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(decode_beam(p, ex, beam).best.log_prob);
}
BENCHMARK(BM_BeamDecode)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_RougeAndBleu(benchmark::State& state) {
  std::vector<std::vector<std::string>> preds, refs;
  for (const auto& d : load_jsonl(HEADLINE_BENCH_DATA)) {
    refs.push_back(metric_tokenize(d.title));
    preds.push_back(metric_tokenize(d.text.substr(0, 120)));
  }
  for (auto _ : state) {
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      total += rouge_n(preds[i], refs[i], 2).f1 + rouge_l(preds[i], refs[i]).f1;
    }
    benchmark::DoNotOptimize(total + bleu(preds, refs));
  }
}
BENCHMARK(BM_RougeAndBleu);

void BM_BpeEncode(benchmark::State& state) {
  std::vector<std::string> lines;
  for (const auto& d : load_jsonl(HEADLINE_BENCH_DATA)) lines.push_back(d.text);
  const BpeModel model = train_bpe(lines, 600);
  std::size_t bytes = 0;
  for (const auto& l : lines) bytes += l.size();
  for (auto _ : state) {
    for (const auto& l : lines) benchmark::DoNotOptimize(model.encode(l));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_BpeEncode);

}  // namespace
}  // namespace headline
BENCHMARK_MAIN();
