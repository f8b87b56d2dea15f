#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kway/corpus.hpp"
#include "kway/matrix.hpp"
#include "kway/miner.hpp"
#include "kway/rng.hpp"

namespace kway::trainer {

struct EmbeddingModel {
  Matrix vectors;                  // row i = vector of word id i
  std::map<int, double> biases;    // co-occurrence order k -> C_k
  std::vector<std::string> words;  // id -> word, parallel to vectors
  std::string vocab_digest;
  bool missing_biases = false;  // sidecar absent when the model was read

  int dim() const { return static_cast<int>(vectors.cols); }
  std::int64_t vocab_size() const { return vectors.rows; }
};

enum class TrainMode { stochastic, full_batch };

struct TrainConfig {
  int dim = 300;
  double initial_lr = 0.01;
  double theta = 100.0;  // weight truncation cap min(h, theta)
  int epochs = 1;        // per curriculum level
  int k_max = 5;
  std::uint64_t seed = 12345;
  TrainMode mode = TrainMode::stochastic;

  bool valid() const {
    return dim >= 1 && initial_lr > 0.0 && theta >= 1.0 && epochs >= 1 &&
           k_max >= 2;
  }
};

struct AdaGradState {
  Matrix accum;  // accumulated squared gradients, same shape as vectors
  std::map<int, double> accum_bias;

  AdaGradState(std::int64_t n, int d) : accum(n, d) {}
};

// Gradient of one set's objective term. The gradient w.r.t. every member
// word is the same vector, -4 * min(h,theta) * residual * sum_of_vectors.
struct SetGradient {
  std::vector<double> word_grad;
  double bias_grad = 0.0;
};

// Fresh models draw every coordinate uniformly from [-0.5/d, +0.5/d] using
// the config seed; warm starts copy vectors and biases bit-for-bit.
EmbeddingModel init_model(std::int64_t vocab_size, const TrainConfig& cfg,
                          const EmbeddingModel* warm_start = nullptr);

// Sum over all sets S of min(h(S),theta) * (ln h(S) - |sum_i w_i|^2 + C_k)^2.
// The truncation applies only to the multiplicative weight; the log keeps the
// raw count. Nonnegative; zero iff every residual vanishes.
double objective(const EmbeddingModel& model,
                 std::span<const miner::FrequentSetTable> tables, double theta);

SetGradient set_gradient(const EmbeddingModel& model, const miner::KWaySet& set,
                         double theta);

// One pass over all sets. Stochastic mode visits a seeded random permutation
// and applies per-parameter AdaGrad steps lr0 / sqrt(accum + 1e-8); full-batch
// mode takes a single plain gradient step of size lr0 on the summed gradient.
// Returns the objective evaluated before any update. A non-finite gradient
// aborts with a diagnostic naming the offending set. threads > 1 runs the
// stochastic permutation in unsynchronized shards (word2vec style); the
// result is then no longer bit-reproducible.
double epoch(EmbeddingModel& model,
             std::span<const miner::FrequentSetTable> tables,
             const TrainConfig& cfg, AdaGradState& ada, Rng& rng,
             int threads = 1);

// Curriculum over orders: level 2 trains from random init on the order-2
// table; level k warm-starts from level k-1 and trains on all orders 2..k,
// each order with its own bias. Returns the model after each level.
std::vector<EmbeddingModel> train_curriculum(
    std::span<const miner::FrequentSetTable> tables, const TrainConfig& cfg,
    const corpus::Vocabulary& vocab, int threads = 1);

// Embedding file: `<n> <d>` header then one `word v1 ... vd` line per word,
// 12 significant digits. Biases go to a `<path>.bias` sidecar of
// `k<TAB>C_k` lines; a model with no biases writes no sidecar, and reading a
// model without one yields an empty bias map with missing_biases set.
void write_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel read_model(const std::string& path);

}  // namespace kway::trainer
