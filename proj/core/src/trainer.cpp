#include "kway/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "kway/digest.hpp"
#include "kway/error.hpp"

namespace kway::trainer {

namespace {

using miner::WordId;

constexpr double kAdaGradEps = 1e-8;

std::string describe_set(const miner::KWaySet& set) {
  std::string s = "{";
  for (std::size_t i = 0; i < set.ids.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(set.ids[i]);
  }
  s += "}";
  return s;
}

void check_set(const EmbeddingModel& model, const miner::KWaySet& set) {
  for (WordId id : set.ids) {
    if (id < 0 || id >= model.vocab_size())
      throw std::invalid_argument("set " + describe_set(set) +
                                  " references unknown word id");
  }
  if (!model.biases.contains(static_cast<int>(set.ids.size())))
    throw std::invalid_argument("no bias C_k for order " +
                                std::to_string(set.ids.size()));
}

// residual = ln h - |sum w_i|^2 + C_k, computed with the set's vector sum
// left in `sum`.
double residual_of(const EmbeddingModel& model, const miner::KWaySet& set,
                   std::vector<double>& sum) {
  const int d = model.dim();
  sum.assign(static_cast<std::size_t>(d), 0.0);
  for (WordId id : set.ids) {
    auto row = model.vectors.row(id);
    for (int c = 0; c < d; ++c) sum[static_cast<std::size_t>(c)] += row[static_cast<std::size_t>(c)];
  }
  double sq = squared_norm(sum);
  double bias = model.biases.at(static_cast<int>(set.ids.size()));
  return std::log(static_cast<double>(set.count)) - sq + bias;
}

struct SetRef {
  const miner::FrequentSetTable* table;
  std::size_t index;
  const miner::KWaySet& get() const { return table->sets[index]; }
};

std::vector<SetRef> flatten(std::span<const miner::FrequentSetTable> tables) {
  std::vector<SetRef> refs;
  std::size_t total = 0;
  for (const auto& t : tables) total += t.sets.size();
  refs.reserve(total);
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < t.sets.size(); ++i) refs.push_back(SetRef{&t, i});
  }
  return refs;
}

void stochastic_update(EmbeddingModel& model, AdaGradState& ada,
                       const miner::KWaySet& set, double theta, double lr,
                       std::vector<double>& sum) {
  double r = residual_of(model, set, sum);
  double m = std::min(static_cast<double>(set.count), theta);
  double gscale = -4.0 * m * r;  // gradient of the term w.r.t. each member word
  double gbias = 2.0 * m * r;
  if (!std::isfinite(gscale) || !std::isfinite(gbias)) {
    throw std::runtime_error("non-finite gradient at set " + describe_set(set));
  }

  const int d = model.dim();
  for (WordId id : set.ids) {
    auto row = model.vectors.row(id);
    auto acc = ada.accum.row(id);
    for (int c = 0; c < d; ++c) {
      double g = gscale * sum[static_cast<std::size_t>(c)];
      acc[static_cast<std::size_t>(c)] += g * g;
      row[static_cast<std::size_t>(c)] -=
          lr / std::sqrt(acc[static_cast<std::size_t>(c)] + kAdaGradEps) * g;
    }
  }
  const int k = static_cast<int>(set.ids.size());
  double& acc_b = ada.accum_bias[k];
  acc_b += gbias * gbias;
  model.biases[k] -= lr / std::sqrt(acc_b + kAdaGradEps) * gbias;
}

}  // namespace

EmbeddingModel init_model(std::int64_t vocab_size, const TrainConfig& cfg,
                          const EmbeddingModel* warm_start) {
  if (!cfg.valid()) throw std::invalid_argument("invalid train configuration");
  EmbeddingModel model;
  if (warm_start != nullptr) {
    if (warm_start->vocab_size() != vocab_size || warm_start->dim() != cfg.dim)
      throw std::invalid_argument("warm start dimensions do not match");
    model = *warm_start;
    return model;
  }
  model.vectors = Matrix(vocab_size, cfg.dim);
  Rng rng(cfg.seed);
  const double half = 0.5 / static_cast<double>(cfg.dim);
  for (auto& x : model.vectors.data) x = rng.uniform(-half, half);
  return model;
}

double objective(const EmbeddingModel& model,
                 std::span<const miner::FrequentSetTable> tables, double theta) {
  double total = 0.0;
  std::vector<double> sum;
  for (const auto& table : tables) {
    for (const auto& set : table.sets) {
      check_set(model, set);
      double r = residual_of(model, set, sum);
      double m = std::min(static_cast<double>(set.count), theta);
      total += m * r * r;
    }
  }
  return total;
}

SetGradient set_gradient(const EmbeddingModel& model, const miner::KWaySet& set,
                         double theta) {
  check_set(model, set);
  std::vector<double> sum;
  double r = residual_of(model, set, sum);
  double m = std::min(static_cast<double>(set.count), theta);
  SetGradient g;
  g.word_grad.resize(sum.size());
  for (std::size_t c = 0; c < sum.size(); ++c) g.word_grad[c] = -4.0 * m * r * sum[c];
  g.bias_grad = 2.0 * m * r;
  return g;
}

double epoch(EmbeddingModel& model,
             std::span<const miner::FrequentSetTable> tables,
             const TrainConfig& cfg, AdaGradState& ada, Rng& rng, int threads) {
  for (const auto& table : tables) {
    for (const auto& set : table.sets) check_set(model, set);
  }
  const double before = objective(model, tables, cfg.theta);

  if (cfg.mode == TrainMode::full_batch) {
    // One plain gradient step on the summed gradient; no AdaGrad scaling, so
    // the step is independent of set order up to fp addition.
    Matrix grad(model.vectors.rows, model.vectors.cols);
    std::map<int, double> bias_grad;
    std::vector<double> sum;
    for (const auto& table : tables) {
      for (const auto& set : table.sets) {
        double r = residual_of(model, set, sum);
        double m = std::min(static_cast<double>(set.count), cfg.theta);
        double gscale = -4.0 * m * r;
        if (!std::isfinite(gscale)) {
          throw std::runtime_error("non-finite gradient at set " +
                                   describe_set(set));
        }
        for (WordId id : set.ids) {
          auto row = grad.row(id);
          for (std::size_t c = 0; c < sum.size(); ++c) row[c] += gscale * sum[c];
        }
        bias_grad[static_cast<int>(set.ids.size())] += 2.0 * m * r;
      }
    }
    for (std::size_t i = 0; i < grad.data.size(); ++i)
      model.vectors.data[i] -= cfg.initial_lr * grad.data[i];
    for (const auto& [k, g] : bias_grad) model.biases[k] -= cfg.initial_lr * g;
    return before;
  }

  auto refs = flatten(tables);
  rng.shuffle(refs);

  if (threads <= 1 || refs.size() < 2) {
    std::vector<double> sum;
    for (const auto& ref : refs)
      stochastic_update(model, ada, ref.get(), cfg.theta, cfg.initial_lr, sum);
    return before;
  }

  // Unsynchronized shards over the permutation; final objective is close to
  // but not bit-equal with the single-worker run.
  std::size_t n_shards = std::min<std::size_t>(static_cast<std::size_t>(threads),
                                               refs.size());
  std::vector<std::thread> pool;
  std::size_t chunk = (refs.size() + n_shards - 1) / n_shards;
  for (std::size_t s = 0; s < n_shards; ++s) {
    std::size_t lo = s * chunk;
    std::size_t hi = std::min(refs.size(), lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      std::vector<double> sum;
      for (std::size_t i = lo; i < hi; ++i)
        stochastic_update(model, ada, refs[i].get(), cfg.theta, cfg.initial_lr,
                          sum);
    });
  }
  for (auto& t : pool) t.join();
  return before;
}

std::vector<EmbeddingModel> train_curriculum(
    std::span<const miner::FrequentSetTable> tables, const TrainConfig& cfg,
    const corpus::Vocabulary& vocab, int threads) {
  if (!cfg.valid()) throw std::invalid_argument("invalid train configuration");
  std::vector<const miner::FrequentSetTable*> by_order(
      static_cast<std::size_t>(cfg.k_max) + 1, nullptr);
  for (const auto& t : tables) {
    if (t.k >= 2 && t.k <= cfg.k_max) by_order[static_cast<std::size_t>(t.k)] = &t;
  }
  for (int k = 2; k <= cfg.k_max; ++k) {
    if (by_order[static_cast<std::size_t>(k)] == nullptr)
      throw std::invalid_argument("missing frequent-set table for order " +
                                  std::to_string(k));
  }

  std::vector<EmbeddingModel> out;
  EmbeddingModel model = init_model(vocab.size(), cfg, nullptr);
  model.words = vocab.words;
  model.vocab_digest = vocab.digest();

  for (int level = 2; level <= cfg.k_max; ++level) {
    std::vector<miner::FrequentSetTable> active;
    for (int k = 2; k <= level; ++k) active.push_back(*by_order[static_cast<std::size_t>(k)]);
    for (int k = 2; k <= level; ++k) model.biases.try_emplace(k, 0.0);

    AdaGradState ada(model.vocab_size(), model.dim());
    Rng rng(cfg.seed + static_cast<std::uint64_t>(level));
    for (int e = 0; e < cfg.epochs; ++e) {
      epoch(model, active, cfg, ada, rng, threads);
    }
    out.push_back(model);
  }
  return out;
}

void write_model(const EmbeddingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot write file: " + path);
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  char buf[64];
  for (std::int64_t i = 0; i < model.vocab_size(); ++i) {
    out << (i < static_cast<std::int64_t>(model.words.size())
                ? model.words[static_cast<std::size_t>(i)]
                : "w" + std::to_string(i));
    for (double v : model.vectors.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!model.biases.empty()) {
    std::ofstream side(path + ".bias");
    if (!side) throw format_error("cannot write file: " + path + ".bias");
    for (const auto& [k, c] : model.biases) {
      std::snprintf(buf, sizeof(buf), "%.12g", c);
      side << k << '\t' << buf << '\n';
    }
  }
}

EmbeddingModel read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw format_error(path + ": missing header");
  std::int64_t n = 0;
  int d = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> n >> d) || n < 0 || d < 1)
      throw format_error(path + ": malformed header '" + line + "'");
  }

  EmbeddingModel model;
  model.vectors = Matrix(n, d);
  model.words.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw format_error(path + ": expected " + std::to_string(n) +
                         " vector rows, found " + std::to_string(i));
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word))
      throw format_error(path + ": empty row at line " + std::to_string(i + 2));
    auto row = model.vectors.row(i);
    for (int c = 0; c < d; ++c) {
      if (!(ls >> row[static_cast<std::size_t>(c)]))
        throw format_error(path + ": row for '" + word + "' has fewer than " +
                           std::to_string(d) + " values");
    }
    double extra;
    if (ls >> extra)
      throw format_error(path + ": row for '" + word + "' has more than " +
                         std::to_string(d) + " values");
    model.words.push_back(std::move(word));
  }

  Fnv1a h;
  for (const auto& w : model.words) {
    h.update(w);
    h.update("\n");
  }
  model.vocab_digest = h.hex();

  std::ifstream side(path + ".bias");
  if (!side) {
    model.missing_biases = true;
    return model;
  }
  std::int64_t lineno = 0;
  while (std::getline(side, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int k = 0;
    double c = 0.0;
    if (!(ls >> k >> c))
      throw format_error(path + ".bias line " + std::to_string(lineno) +
                         ": expected `k<TAB>C_k`");
    model.biases[k] = c;
  }
  return model;
}

}  // namespace kway::trainer
