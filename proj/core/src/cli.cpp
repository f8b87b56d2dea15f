#include "kway/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kway/corpus.hpp"
#include "kway/error.hpp"
#include "kway/eval.hpp"
#include "kway/genwalk.hpp"
#include "kway/miner.hpp"
#include "kway/trainer.hpp"
#include "kway/verifier.hpp"

namespace kway::cli {

namespace {

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open file: " + path);
  return in;
}

// Reorders model rows to vocabulary id order for operations that pair mined
// id tuples with vectors.
Matrix align_to_vocab(const trainer::EmbeddingModel& model,
                      const corpus::Vocabulary& vocab) {
  std::unordered_map<std::string, std::int64_t> index;
  index.reserve(model.words.size());
  for (std::size_t i = 0; i < model.words.size(); ++i)
    index.emplace(model.words[i], static_cast<std::int64_t>(i));

  Matrix aligned(vocab.size(), model.dim());
  for (corpus::WordId id = 0; id < vocab.size(); ++id) {
    auto it = index.find(vocab.words[static_cast<std::size_t>(id)]);
    if (it == index.end())
      throw format_error("model does not cover vocabulary word '" +
                         vocab.words[static_cast<std::size_t>(id)] + "'");
    auto src = model.vectors.row(it->second);
    auto dst = aligned.row(id);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return aligned;
}

struct VocabArgs {
  std::string corpus_path;
  std::string out_path;
  std::int64_t min_count = 1000;
  bool keep_case = false;
};

struct MineArgs {
  std::string corpus_path;
  std::string vocab_path;  // optional; built from the corpus when empty
  std::string out_prefix;
  std::int64_t min_count = 1000;
  std::int64_t support = 1000;
  int window = 10;
  int stride = 1;
  int k_max = 5;
  int threads = 1;
  bool keep_case = false;
};

struct TrainArgs {
  std::string sets_prefix;
  std::string vocab_path;
  std::string out_prefix;
  std::string mode = "stochastic";
  trainer::TrainConfig cfg;
  int threads = 1;
};

struct GenerateArgs {
  genwalk::WalkConfig cfg;
  std::string corpus_path;
  std::string truth_path;
};

struct PartitionArgs {
  std::string model_path;
  std::string out_prefix;
  int order = 2;
  std::size_t contexts = 10000;
  std::uint64_t seed = 12345;
};

struct CorrelationArgs {
  std::string model_path;
  std::string vocab_path;
  std::string sets_path;
  std::string out_prefix;
  std::size_t samples = 1000000;
  std::uint64_t seed = 12345;
};

struct EvalArgs {
  std::string model_path;
  std::string data_path;
  std::string train_path;  // textclass only
  std::string test_path;   // textclass only
  std::string name;
  std::string out_path;
  int epochs = 500;
  double lr = 0.1;
};

struct CompareArgs {
  std::string model_a;
  std::string model_b;
  std::vector<std::string> data_paths;
  std::string out_path;
};

void emit_report(const eval::EvalReport& report, const std::string& out_path) {
  if (out_path.empty()) {
    eval::write_report(report, std::cout);
  } else {
    auto out = open_out(out_path);
    eval::write_report(report, out);
  }
  if (!report.notes.empty())
    std::cerr << "note (" << report.dataset << "): " << report.notes << '\n';
}

int run_vocab(const VocabArgs& a) {
  auto in = open_in(a.corpus_path);
  auto vocab = corpus::build_vocabulary(in, a.min_count, !a.keep_case);
  corpus::write_vocabulary(vocab, a.out_path);
  std::cerr << "vocabulary: " << vocab.size() << " words\n";
  return 0;
}

int run_mine(const MineArgs& a) {
  corpus::Vocabulary vocab;
  if (a.vocab_path.empty()) {
    auto in = open_in(a.corpus_path);
    vocab = corpus::build_vocabulary(in, a.min_count, !a.keep_case);
    corpus::write_vocabulary(vocab, a.out_prefix + ".vocab.tsv");
  } else {
    vocab = corpus::read_vocabulary(a.vocab_path);
  }

  auto in = open_in(a.corpus_path);
  auto encoded = corpus::encode(in, vocab, !a.keep_case);

  miner::MinerConfig cfg;
  cfg.support = a.support;
  cfg.k_max = a.k_max;
  cfg.window = corpus::WindowSpec{a.window, a.stride};
  auto tables = miner::mine_all(encoded, cfg, a.threads);

  for (const auto& table : tables) {
    std::string path = a.out_prefix + ".k" + std::to_string(table.k) + ".tsv";
    miner::write_sets(table, path);
    std::cerr << "order " << table.k << ": " << table.sets.size() << " sets -> "
              << path << '\n';
  }
  return 0;
}

int run_train(TrainArgs a) {
  a.cfg.mode = a.mode == "full_batch" ? trainer::TrainMode::full_batch
                                      : trainer::TrainMode::stochastic;
  auto vocab = corpus::read_vocabulary(a.vocab_path);
  std::vector<miner::FrequentSetTable> tables;
  for (int k = 2; k <= a.cfg.k_max; ++k) {
    tables.push_back(
        miner::read_sets(a.sets_prefix + ".k" + std::to_string(k) + ".tsv"));
  }
  auto models = trainer::train_curriculum(tables, a.cfg, vocab, a.threads);
  for (std::size_t i = 0; i < models.size(); ++i) {
    int level = 2 + static_cast<int>(i);
    std::string path = a.out_prefix + ".k" + std::to_string(level) + ".txt";
    trainer::write_model(models[i], path);
    std::cerr << "level " << level << " model -> " << path << '\n';
  }
  return 0;
}

int run_generate(const GenerateArgs& a) {
  Rng rng(a.cfg.seed);
  auto truth = genwalk::sample_ground_truth(a.cfg, rng);
  auto corpus = genwalk::generate_corpus(a.cfg, truth);
  genwalk::write_corpus(corpus, a.corpus_path);
  genwalk::write_truth(truth, a.truth_path);
  std::cerr << "generated " << a.cfg.tokens << " tokens over "
            << corpus.documents.size() << " documents\n";
  return 0;
}

int run_partition(const PartitionArgs& a) {
  auto model = trainer::read_model(a.model_path);
  Rng rng(a.seed);
  auto report =
      verifier::partition_values(model.vectors, a.contexts, a.order, rng);
  {
    auto out = open_out(a.out_prefix + ".hist.csv");
    verifier::write_histogram_csv(report, out);
  }
  {
    auto out = open_out(a.out_prefix + ".summary.json");
    verifier::write_concentration_summary(report, out);
  }
  verifier::write_concentration_summary(report, std::cout);
  return 0;
}

int run_correlation(const CorrelationArgs& a) {
  auto model = trainer::read_model(a.model_path);
  auto vocab = corpus::read_vocabulary(a.vocab_path);
  auto table = miner::read_sets(a.sets_path);
  auto vectors = align_to_vocab(model, vocab);
  Rng rng(a.seed);
  auto report =
      verifier::norm_frequency_correlation(vectors, table, a.samples, rng);
  {
    auto out = open_out(a.out_prefix + ".scatter.csv");
    verifier::write_scatter_csv(report, out);
  }
  {
    auto out = open_out(a.out_prefix + ".summary.json");
    verifier::write_correlation_summary(report, out);
  }
  verifier::write_correlation_summary(report, std::cout);
  return 0;
}

int run_compare(const CompareArgs& a) {
  auto model_a = trainer::read_model(a.model_a);
  auto model_b = trainer::read_model(a.model_b);

  eval::SimilarityDataset pooled;
  pooled.name = "pooled";
  for (const auto& path : a.data_paths) {
    auto ds = eval::normalize_ratings(eval::read_similarity(path, stem_of(path)));
    pooled.rows.insert(pooled.rows.end(), ds.rows.begin(), ds.rows.end());
  }
  auto selected = eval::divergence_report(model_a, model_b, pooled);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!a.out_path.empty()) {
    file = open_out(a.out_path);
    out = &file;
  }
  *out << "word1\tword2\tscore_a\tscore_b\trating\tdifference\n";
  char buf[64];
  for (const auto& p : selected) {
    *out << p.word1 << '\t' << p.word2;
    for (double v : {p.score_a, p.score_b, p.rating, p.difference}) {
      std::snprintf(buf, sizeof(buf), "%.6g", v);
      *out << '\t' << buf;
    }
    *out << '\n';
  }
  std::cerr << "selected " << selected.size() << " of " << pooled.rows.size()
            << " pooled pairs\n";
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"k-way co-occurrence mining, embedding training and evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value configuration file");
  app.allow_config_extras(false);  // unknown keys are rejected
  app.fallthrough();

  VocabArgs vocab_args;
  auto* vocab_cmd = app.add_subcommand("vocab", "Build a frequency-filtered vocabulary");
  vocab_cmd->add_option("--corpus", vocab_args.corpus_path, "input text, one document per line")
      ->required();
  vocab_cmd->add_option("--out", vocab_args.out_path, "vocabulary TSV output")->required();
  vocab_cmd->add_option("--min-count", vocab_args.min_count, "minimum token frequency")
      ->capture_default_str()->check(CLI::PositiveNumber);
  vocab_cmd->add_flag("--keep-case", vocab_args.keep_case, "skip lowercasing");

  MineArgs mine_args;
  auto* mine_cmd = app.add_subcommand("mine", "Mine frequent k-way co-occurrences");
  mine_cmd->add_option("--corpus", mine_args.corpus_path, "input text, one document per line")
      ->required();
  mine_cmd->add_option("--vocab", mine_args.vocab_path, "existing vocabulary TSV");
  mine_cmd->add_option("--min-count", mine_args.min_count, "vocabulary threshold when --vocab is absent")
      ->capture_default_str()->check(CLI::PositiveNumber);
  mine_cmd->add_option("--support", mine_args.support, "minimum window support")
      ->capture_default_str()->check(CLI::PositiveNumber);
  mine_cmd->add_option("--window", mine_args.window, "window width in tokens")
      ->capture_default_str()->check(CLI::Range(2, 1 << 20));
  mine_cmd->add_option("--stride", mine_args.stride, "window stride in tokens")
      ->capture_default_str()->check(CLI::PositiveNumber);
  mine_cmd->add_option("--kmax", mine_args.k_max, "highest co-occurrence order")
      ->capture_default_str()->check(CLI::PositiveNumber);
  mine_cmd->add_option("--threads", mine_args.threads, "shards for support counting")
      ->capture_default_str()->check(CLI::PositiveNumber);
  mine_cmd->add_option("--out-prefix", mine_args.out_prefix, "prefix for per-order set files")
      ->required();
  mine_cmd->add_flag("--keep-case", mine_args.keep_case, "skip lowercasing");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train embeddings over mined set tables");
  train_cmd->add_option("--sets-prefix", train_args.sets_prefix,
                        "prefix of <prefix>.k<K>.tsv set files")->required();
  train_cmd->add_option("--vocab", train_args.vocab_path, "vocabulary TSV")
      ->required();
  train_cmd->add_option("--out", train_args.out_prefix, "prefix for per-level model files")
      ->required();
  train_cmd->add_option("--dim", train_args.cfg.dim, "embedding dimensionality")
      ->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train_args.cfg.initial_lr, "initial learning rate")
      ->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--theta", train_args.cfg.theta, "count truncation cap")
      ->capture_default_str()->check(CLI::Range(1.0, 1e18));
  train_cmd->add_option("--epochs", train_args.cfg.epochs, "epochs per curriculum level")
      ->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--kmax", train_args.cfg.k_max, "highest order to train")
      ->capture_default_str()->check(CLI::Range(2, 64));
  train_cmd->add_option("--seed", train_args.cfg.seed, "random seed")
      ->capture_default_str();
  train_cmd->add_option("--mode", train_args.mode, "stochastic or full_batch")
      ->check(CLI::IsMember({"stochastic", "full_batch"}))
      ->capture_default_str();
  train_cmd->add_option("--threads", train_args.threads,
                        "stochastic update shards (bit-exactness needs 1)")
      ->capture_default_str()->check(CLI::PositiveNumber);

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a synthetic random-walk corpus");
  gen_cmd->add_option("--n", gen_args.cfg.vocab_size, "vocabulary size")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dim", gen_args.cfg.dim, "discourse/embedding dimension")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--eps2", gen_args.cfg.step_bound, "walk drift bound scale")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--kappa", gen_args.cfg.norm_scale, "word scale upper bound")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--tokens", gen_args.cfg.tokens, "total tokens to emit")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--doc-tokens", gen_args.cfg.tokens_per_document, "tokens per document")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen_args.cfg.seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_args.corpus_path, "corpus output path")->required();
  gen_cmd->add_option("--truth", gen_args.truth_path, "ground-truth vector output path")
      ->required();

  PartitionArgs part_args;
  auto* part_cmd = app.add_subcommand("verify-partition",
                                      "Concentration report for partition values");
  part_cmd->add_option("--model", part_args.model_path, "embedding file")
      ->required();
  part_cmd->add_option("--k", part_args.order, "co-occurrence order")
      ->capture_default_str()->check(CLI::PositiveNumber);
  part_cmd->add_option("--contexts", part_args.contexts, "number of unit contexts")
      ->capture_default_str()->check(CLI::Range(2, 1 << 30));
  part_cmd->add_option("--seed", part_args.seed, "random seed")->capture_default_str();
  part_cmd->add_option("--out-prefix", part_args.out_prefix, "output prefix")->required();

  CorrelationArgs corr_args;
  auto* corr_cmd = app.add_subcommand(
      "verify-correlation", "Correlation of ln counts with squared vector-sum norms");
  corr_cmd->add_option("--model", corr_args.model_path, "embedding file")
      ->required();
  corr_cmd->add_option("--vocab", corr_args.vocab_path, "vocabulary TSV matching the set file")
      ->required();
  corr_cmd->add_option("--sets", corr_args.sets_path, "frequent-set file for one order")
      ->required();
  corr_cmd->add_option("--samples", corr_args.samples, "sets sampled without replacement")
      ->capture_default_str()->check(CLI::PositiveNumber);
  corr_cmd->add_option("--seed", corr_args.seed, "random seed")->capture_default_str();
  corr_cmd->add_option("--out-prefix", corr_args.out_prefix, "output prefix")->required();

  EvalArgs sim_args, ana_args, rel_args, text_args;
  auto add_eval_common = [](CLI::App* cmd, EvalArgs& args) {
    cmd->add_option("--model", args.model_path, "embedding file")
        ->required();
    cmd->add_option("--name", args.name, "dataset name for the report");
    cmd->add_option("--out", args.out_path, "report file (stdout when absent)");
  };
  auto* sim_cmd = app.add_subcommand("eval-sim", "Word similarity benchmark");
  add_eval_common(sim_cmd, sim_args);
  sim_cmd->add_option("--data", sim_args.data_path, "TSV word1<TAB>word2<TAB>rating")
      ->required();

  auto* ana_cmd = app.add_subcommand("eval-analogy", "Word analogy benchmark");
  add_eval_common(ana_cmd, ana_args);
  ana_cmd->add_option("--data", ana_args.data_path, "TSV a<TAB>b<TAB>c<TAB>d")
      ->required();

  auto* rel_cmd = app.add_subcommand("eval-relclass", "Relation classification benchmark");
  add_eval_common(rel_cmd, rel_args);
  rel_cmd->add_option("--data", rel_args.data_path, "TSV relation<TAB>word1<TAB>word2")
      ->required();

  auto* text_cmd = app.add_subcommand("eval-textclass", "Short-text classification benchmark");
  add_eval_common(text_cmd, text_args);
  text_cmd->add_option("--train", text_args.train_path, "train TSV label<TAB>tokens")
      ->required();
  text_cmd->add_option("--test", text_args.test_path, "test TSV label<TAB>tokens")
      ->required();
  text_cmd->add_option("--epochs", text_args.epochs, "logistic regression epochs")
      ->capture_default_str()->check(CLI::PositiveNumber);
  text_cmd->add_option("--lr", text_args.lr, "logistic regression step size")
      ->capture_default_str()->check(CLI::PositiveNumber);

  CompareArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "Divergence report between two models");
  cmp_cmd->add_option("--model-a", cmp_args.model_a, "first embedding file")
      ->required();
  cmp_cmd->add_option("--model-b", cmp_args.model_b, "second embedding file")
      ->required();
  cmp_cmd->add_option("--data", cmp_args.data_paths,
                      "similarity TSVs pooled after per-dataset normalization")
      ->required();
  cmp_cmd->add_option("--out", cmp_args.out_path, "report file (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto parsed = app.get_subcommands();
  CLI::App* sub = parsed.empty() ? nullptr : parsed.front();
  if (sub != nullptr) {
    std::cerr << "# resolved configuration [" << sub->get_name() << "]\n";
    std::istringstream cfg(sub->config_to_str(true, false));
    std::string line;
    while (std::getline(cfg, line)) std::cerr << "#   " << line << '\n';
  }

  try {
    if (sub == vocab_cmd) return run_vocab(vocab_args);
    if (sub == mine_cmd) return run_mine(mine_args);
    if (sub == train_cmd) return run_train(train_args);
    if (sub == gen_cmd) return run_generate(gen_args);
    if (sub == part_cmd) return run_partition(part_args);
    if (sub == corr_cmd) return run_correlation(corr_args);
    if (sub == sim_cmd) {
      auto model = trainer::read_model(sim_args.model_path);
      auto name = sim_args.name.empty() ? stem_of(sim_args.data_path) : sim_args.name;
      emit_report(eval::eval_similarity(model, eval::read_similarity(sim_args.data_path, name)),
                  sim_args.out_path);
      return 0;
    }
    if (sub == ana_cmd) {
      auto model = trainer::read_model(ana_args.model_path);
      auto name = ana_args.name.empty() ? stem_of(ana_args.data_path) : ana_args.name;
      emit_report(eval::eval_analogy_cosadd(model, eval::read_analogy(ana_args.data_path, name)),
                  ana_args.out_path);
      return 0;
    }
    if (sub == rel_cmd) {
      auto model = trainer::read_model(rel_args.model_path);
      auto name = rel_args.name.empty() ? stem_of(rel_args.data_path) : rel_args.name;
      emit_report(
          eval::eval_relation_diffvec(model, eval::read_relation(rel_args.data_path, name)),
          rel_args.out_path);
      return 0;
    }
    if (sub == text_cmd) {
      auto model = trainer::read_model(text_args.model_path);
      auto name = text_args.name.empty() ? stem_of(text_args.train_path) : text_args.name;
      emit_report(eval::eval_textclass(
                      model,
                      eval::read_textclass(text_args.train_path, text_args.test_path, name),
                      text_args.epochs, text_args.lr),
                  text_args.out_path);
      return 0;
    }
    if (sub == cmp_cmd) return run_compare(cmp_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace kway::cli
