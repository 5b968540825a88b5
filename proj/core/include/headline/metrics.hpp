#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace headline {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// f1 is the harmonic mean, 0 when p + r = 0.
  static RougeScore from(double precision, double recall);
};

using Tokens = std::span<const std::string>;

/// Clipped n-gram overlap. Empty n-gram sets score 0.
RougeScore rouge_n(Tokens candidate, Tokens reference, std::size_t n);

std::size_t lcs_length(Tokens a, Tokens b);
RougeScore rouge_l(Tokens candidate, Tokens reference);

double r_mean_f(const RougeScore& r1, const RougeScore& r2, const RougeScore& rl);

inline constexpr std::size_t kBleuMaxOrder = 4;

/// Corpus BLEU-4 on a 0-100 scale, unsmoothed. Orders longer than the
/// longest candidate are left out of the geometric mean; any other order
/// with zero clipped matches makes the score 0.
double bleu(std::span<const std::vector<std::string>> candidates, std::span<const std::vector<std::string>> references);

/// Lowercase, collapse whitespace, detach punctuation.
std::vector<std::string> metric_tokenize(std::string_view text);

struct ExampleScore {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;
};

struct EvalReport {
  RougeScore rouge1;  // arithmetic means over examples
  RougeScore rouge2;
  RougeScore rougeL;
  double r_mean_f = 0.0;
  double bleu = 0.0;
  std::vector<ExampleScore> examples;

  std::size_t n_examples() const { return examples.size(); }
  std::string to_json() const;
};

EvalReport evaluate(std::span<const std::string> predictions, std::span<const std::string> references);

/// One prediction per line against the titles of a JSONL reference file.
EvalReport evaluate_corpus(const std::filesystem::path& predictions, const std::filesystem::path& references);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace headline
