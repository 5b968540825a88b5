#include "headline/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

#include "headline/corpus.hpp"
#include "headline/error.hpp"
#include "headline/utf8.hpp"
#include "headline/word_tokenizer.hpp"

namespace headline {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(Tokens tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_matches(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t matches = 0;
  for (const auto& [gram, count] : cand) {
    if (auto it = ref.find(gram); it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json score_json(const RougeScore& s) { return {{"p", s.precision}, {"r", s.recall}, {"f", s.f1}}; }

}  // namespace

RougeScore RougeScore::from(double precision, double recall) {
  const double sum = precision + recall;
  return {precision, recall, sum > 0.0 ? 2.0 * precision * recall / sum : 0.0};
}

RougeScore rouge_n(Tokens candidate, Tokens reference, std::size_t n) {
  if (n == 0) throw InputError("rouge_n: n must be at least 1");
  const std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  const std::size_t ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;
  const std::size_t matches = clipped_matches(ngrams(candidate, n), ngrams(reference, n));
  return RougeScore::from(ratio(matches, cand_total), ratio(matches, ref_total));
}

std::size_t lcs_length(Tokens a, Tokens b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(Tokens candidate, Tokens reference) {
  const std::size_t l = lcs_length(candidate, reference);
  return RougeScore::from(ratio(l, candidate.size()), ratio(l, reference.size()));
}

double r_mean_f(const RougeScore& r1, const RougeScore& r2, const RougeScore& rl) {
  return (r1.f1 + r2.f1 + rl.f1) / 3.0;
}

double bleu(std::span<const std::vector<std::string>> candidates,
            std::span<const std::vector<std::string>> references) {
  if (candidates.size() != references.size()) {
    throw InputError("bleu: " + std::to_string(candidates.size()) + " candidates but " +
                     std::to_string(references.size()) + " references");
  }
  if (candidates.empty()) throw InputError("bleu: empty corpus");

  std::size_t cand_len = 0, ref_len = 0, longest = 0;
  std::array<std::size_t, kBleuMaxOrder> matches{}, totals{};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
    longest = std::max(longest, candidates[i].size());
    for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
      if (candidates[i].size() >= n) totals[n - 1] += candidates[i].size() - n + 1;
      matches[n - 1] += clipped_matches(ngrams(candidates[i], n), ngrams(references[i], n));
    }
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= std::min(kBleuMaxOrder, longest); ++n) {
    if (matches[n - 1] == 0) return 0.0;
    log_sum += std::log(ratio(matches[n - 1], totals[n - 1]));
    ++orders;
  }
  const double brevity =
      std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len)));
  return 100.0 * brevity * std::exp(log_sum / static_cast<double>(orders));
}

std::vector<std::string> metric_tokenize(std::string_view text) { return word_tokenize(utf8::normalize(text)); }

std::string EvalReport::to_json() const {
  const nlohmann::json j = {{"rouge1", score_json(rouge1)}, {"rouge2", score_json(rouge2)},
                            {"rougeL", score_json(rougeL)}, {"r_mean_f", r_mean_f},
                            {"bleu", bleu},                 {"n_examples", n_examples()}};
  return j.dump(2) + "\n";
}

EvalReport evaluate(std::span<const std::string> predictions, std::span<const std::string> references) {
  if (predictions.size() != references.size()) {
    throw InputError("prediction count " + std::to_string(predictions.size()) + " does not match reference count " +
                     std::to_string(references.size()));
  }
  if (predictions.empty()) throw InputError("nothing to evaluate: no predictions");

  EvalReport report;
  std::vector<std::vector<std::string>> cands, refs;
  RougeScore sum1, sum2, suml;
  const auto accumulate = [](RougeScore& acc, const RougeScore& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.f1 += s.f1;
  };
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    cands.push_back(metric_tokenize(predictions[i]));
    refs.push_back(metric_tokenize(references[i]));
    ExampleScore s{rouge_n(cands.back(), refs.back(), 1), rouge_n(cands.back(), refs.back(), 2),
                   rouge_l(cands.back(), refs.back())};
    accumulate(sum1, s.rouge1);
    accumulate(sum2, s.rouge2);
    accumulate(suml, s.rougeL);
    report.examples.push_back(s);
  }
  const double n = static_cast<double>(predictions.size());
  const auto mean = [n](const RougeScore& s) { return RougeScore{s.precision / n, s.recall / n, s.f1 / n}; };
  report.rouge1 = mean(sum1);
  report.rouge2 = mean(sum2);
  report.rougeL = mean(suml);
  report.r_mean_f = r_mean_f(report.rouge1, report.rouge2, report.rougeL);
  report.bleu = bleu(cands, refs);
  return report;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

EvalReport evaluate_corpus(const std::filesystem::path& predictions, const std::filesystem::path& references) {
  const std::vector<std::string> preds = read_lines(predictions);
  std::vector<std::string> titles;
  for (const Document& doc : load_jsonl(references)) titles.push_back(doc.title);
  if (preds.size() != titles.size()) {
    throw InputError(predictions.string() + " has " + std::to_string(preds.size()) + " lines but " +
                     references.string() + " has " + std::to_string(titles.size()) + " references");
  }
  return evaluate(preds, titles);
}

}  // namespace headline
