// Command-line front end: tokenizer training, splitting, training,
// generation, baselines and evaluation. Data goes to files, progress to
// stderr. Exit status: 0 ok, 2 bad input or usage, 1 runtime failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "headline/baselines.hpp"
#include "headline/bpe.hpp"
#include "headline/checkpoint.hpp"
#include "headline/corpus.hpp"
#include "headline/decoder.hpp"
#include "headline/error.hpp"
#include "headline/metrics.hpp"
#include "headline/run_config.hpp"
#include "headline/tokenizer.hpp"
#include "headline/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace headline;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& line : lines) {
    std::string clean = line;
    std::replace(clean.begin(), clean.end(), '\n', ' ');
    text += clean + "\n";
  }
  write_text(path, text);
}

std::vector<std::string> corpus_lines(const std::vector<Document>& docs) {
  std::vector<std::string> lines;
  for (const auto& d : docs) {
    lines.push_back(d.text);
    lines.push_back(d.title);
  }
  return lines;
}

// ---- bpe-train ----

struct BpeTrainArgs {
  fs::path input, out;
  std::size_t vocab_size = 0;
};

void run_bpe_train(const BpeTrainArgs& a) {
  const auto docs = load_jsonl(a.input);
  std::cerr << "training BPE on " << docs.size() << " documents, target vocabulary " << a.vocab_size << "\n";
  const BpeModel model = train_bpe(corpus_lines(docs), a.vocab_size);
  save_bpe(model, a.out);
  std::cerr << "wrote " << a.out.string() << " (" << model.merges().size() << " merges, "
            << model.vocabulary().size() << " tokens)\n";
}

// ---- split ----

struct SplitArgs {
  fs::path input, out_dir;
  std::string ratio = "90:5:5";
  std::uint64_t seed = 1;
};

void run_split(const SplitArgs& a) {
  const SplitConfig config = SplitConfig::parse_ratio(a.ratio, a.seed);
  auto split = split_dataset(load_jsonl(a.input), config);
  write_split(a.out_dir, split, config);
  std::cerr << "split into " << split.train.size() << "/" << split.val.size() << "/" << split.test.size()
            << " documents in " << a.out_dir.string() << "\n";
}

// ---- train ----

struct TrainArgs {
  fs::path config, out_dir;
  bool resume = false;
};

std::vector<EncodedExample> encode_all(const std::vector<Document>& docs, const Tokenizer& tokenizer,
                                       const TruncationLimits& limits, std::size_t vocab_size) {
  std::vector<EncodedExample> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(encode_example(d, tokenizer, limits, vocab_size));
  return out;
}

std::string metrics_jsonl(const TrainReport& report) {
  std::string text;
  for (const auto& m : report.epochs) {
    const nlohmann::json j = {{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"val_loss", m.val_loss}};
    text += j.dump() + "\n";
  }
  return text;
}

void run_train(const TrainArgs& a) {
  RunConfig config = RunConfig::load(a.config);
  config.validate();
  const auto train_docs = load_jsonl(config.train_path);
  const auto val_docs = load_jsonl(config.val_path);

  Tokenizer tokenizer = [&] {
    if (!config.tokenizer_path.empty()) return Tokenizer::load(config.tokenizer_path);
    return train_word_tokenizer(corpus_lines(train_docs), config.word_vocab_size);
  }();
  if (tokenizer.level() != config.model.token_level) {
    throw InputError("tokenizer " + config.tokenizer_path.string() + " is " + std::string(to_string(tokenizer.level())) +
                     " level but model.token_level is " + std::string(to_string(config.model.token_level)));
  }
  config.model.vocab_size = tokenizer.vocabulary().size();

  const auto train_set = encode_all(train_docs, tokenizer, config.truncation, config.model.vocab_size);
  const auto val_set = encode_all(val_docs, tokenizer, config.truncation, config.model.vocab_size);

  fs::create_directories(a.out_dir);
  const fs::path last_path = a.out_dir / "last.ckpt";
  const fs::path best_path = a.out_dir / "best.ckpt";

  TrainerState state = [&] {
    if (!a.resume) return start_training(config.model);
    TrainerState restored = restore_trainer_state(load_checkpoint(last_path));
    if (!(restored.params.config == config.model)) {
      throw InputError(last_path.string() + " was trained with a different model configuration");
    }
    std::cerr << "resuming after epoch " << restored.epochs_completed() << "\n";
    return restored;
  }();

  write_text(a.out_dir / "config.resolved", config.snapshot());
  write_text(a.out_dir / "tokenizer.txt", tokenizer.serialize());

  const auto save = [&](const TrainerState& s) {
    Checkpoint last{s.params, tokenizer.serialize(), config.truncation, {}, "{}"};
    store_trainer_state(s, last);
    save_checkpoint(last, last_path);
    Checkpoint best{s.best_params, tokenizer.serialize(), config.truncation, {}, "{}"};
    save_checkpoint(best, best_path);
    write_text(a.out_dir / "metrics.jsonl", metrics_jsonl(s.report));
  };

  std::cerr << "training " << param_count(config.model) << " parameters on " << train_set.size() << " examples\n";
  train(state, train_set, val_set, config.train, [&](const TrainerState& s, const EpochMetrics& m) {
    std::cerr << "epoch " << m.epoch << ": train " << m.train_loss << ", val " << m.val_loss << "\n";
    save(s);
  });
  save(state);

  const nlohmann::json run = {{"version", HEADLINE_VERSION},
                              {"seed", config.seed},
                              {"epochs", state.epochs_completed()},
                              {"best_epoch", state.report.best_epoch},
                              {"best_val_loss", state.report.best_val_loss},
                              {"stop_reason", state.report.stop_reason}};
  write_text(a.out_dir / "run.json", run.dump(2) + "\n");
  std::cerr << "stopped (" << state.report.stop_reason << "); best epoch " << state.report.best_epoch << "\n";
}

// ---- generate ----

struct GenerateArgs {
  fs::path checkpoint, input, out;
  std::size_t beam = 10;
  std::size_t max_length = 30;
  double alpha = 0.0;
  bool greedy = false;
  bool constrained = false;
};

void run_generate(const GenerateArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (ckpt.tokenizer.empty()) throw InputError(a.checkpoint.string() + " carries no tokenizer");
  const Tokenizer tokenizer = Tokenizer::parse(ckpt.tokenizer);
  const auto docs = load_jsonl(a.input, /*require_title=*/false);

  BeamConfig beam{a.constrained ? BeamConfig::constrained().width : a.beam, a.max_length, a.alpha};
  beam.validate();

  std::vector<std::string> lines;
  lines.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const EncodedExample ex = encode_source_text(docs[i].text, tokenizer, ckpt.limits, ckpt.params.config.vocab_size);
    const Hypothesis h = a.greedy ? decode_greedy(ckpt.params, ex, beam.max_target_length)
                                  : decode_beam(ckpt.params, ex, beam).best;
    lines.push_back(resolve_and_postprocess(h.tokens, ex.oov_map, tokenizer));
    if ((i + 1) % 50 == 0) std::cerr << "decoded " << i + 1 << "/" << docs.size() << "\n";
  }
  write_lines(a.out, lines);
  std::cerr << "wrote " << lines.size() << " headlines to " << a.out.string() << "\n";
}

// ---- baseline ----

struct BaselineArgs {
  fs::path input, out;
  std::string mode;
};

void run_baseline(const BaselineArgs& a) {
  if (a.mode != "first" && a.mode != "first-modified") {
    throw InputError("unknown baseline mode '" + a.mode + "' (expected first or first-modified)");
  }
  const auto docs = load_jsonl(a.input, /*require_title=*/false);
  std::vector<std::string> lines;
  for (const auto& d : docs) lines.push_back(a.mode == "first" ? first_sentence(d.text) : first_sentence_modified(d.text));
  write_lines(a.out, lines);
  std::cerr << "wrote " << lines.size() << " " << a.mode << " headlines to " << a.out.string() << "\n";
}

// ---- evaluate ----

struct EvaluateArgs {
  fs::path predictions, references, out;
};

void run_evaluate(const EvaluateArgs& a) {
  const EvalReport report = evaluate_corpus(a.predictions, a.references);
  write_text(a.out, report.to_json());
  std::cerr << "r_mean_f " << report.r_mean_f << ", bleu " << report.bleu << " over " << report.n_examples()
            << " examples\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headline generation: tokenizer training, dataset splitting, training, decoding and evaluation"};
  app.set_version_flag("--version", HEADLINE_VERSION);
  app.require_subcommand(1);

  BpeTrainArgs bpe;
  auto* bpe_cmd = app.add_subcommand("bpe-train", "Train a BPE tokenizer on the text and title fields of a JSONL corpus");
  bpe_cmd->add_option("--input", bpe.input, "JSONL corpus")->required();
  bpe_cmd->add_option("--vocab-size", bpe.vocab_size, "Target vocabulary size, specials included")->required();
  bpe_cmd->add_option("--out", bpe.out, "Output tokenizer file")->required();

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Shuffle and split a JSONL corpus into train/val/test");
  split_cmd->add_option("--input", split.input, "JSONL corpus")->required();
  split_cmd->add_option("--ratio", split.ratio, "train:val:test percentages")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--out-dir", split.out_dir, "Directory for train/val/test.jsonl and split.json")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a run configuration");
  train_cmd->add_option("--config", tr.config, "key = value run configuration")->required();
  train_cmd->add_option("--out-dir", tr.out_dir, "Run directory for checkpoints, metrics and config snapshot")
      ->required();
  train_cmd->add_flag("--resume", tr.resume, "Continue from <out-dir>/last.ckpt");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Decode one headline per input document");
  gen_cmd->add_option("--checkpoint", gen.checkpoint, "Model checkpoint")->required();
  gen_cmd->add_option("--input", gen.input, "JSONL documents (title optional)")->required();
  gen_cmd->add_option("--out", gen.out, "Output file, one headline per line")->required();
  gen_cmd->add_option("--beam", gen.beam, "Beam width")->capture_default_str();
  gen_cmd->add_option("--max-length", gen.max_length, "Maximum tokens before EOS")->capture_default_str();
  gen_cmd->add_option("--length-alpha", gen.alpha, "Length normalization exponent (0 = off)")->capture_default_str();
  gen_cmd->add_flag("--greedy", gen.greedy, "Argmax decoding instead of beam search");
  gen_cmd->add_flag("--constrained", gen.constrained, "Time-constrained preset: beam width 2");

  BaselineArgs base;
  auto* base_cmd = app.add_subcommand("baseline", "First-sentence headlines");
  base_cmd->add_option("--mode", base.mode, "first or first-modified")->required();
  base_cmd->add_option("--input", base.input, "JSONL documents")->required();
  base_cmd->add_option("--out", base.out, "Output file, one headline per line")->required();

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "ROUGE-1/2/L, R-mean-f and BLEU against JSONL titles");
  eval_cmd->add_option("--predictions", ev.predictions, "One headline per line")->required();
  eval_cmd->add_option("--references", ev.references, "JSONL with title fields")->required();
  eval_cmd->add_option("--out", ev.out, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*bpe_cmd) run_bpe_train(bpe);
    if (*split_cmd) run_split(split);
    if (*train_cmd) run_train(tr);
    if (*gen_cmd) run_generate(gen);
    if (*base_cmd) run_baseline(base);
    if (*eval_cmd) run_evaluate(ev);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
