#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kway/matrix.hpp"
#include "kway/rng.hpp"

namespace kway::genwalk {

struct WalkConfig {
  std::int32_t vocab_size = 1000;  // n, must satisfy n >= d
  int dim = 50;
  double step_bound = 0.5;   // epsilon_2: per-step drift <= epsilon_2/sqrt(d)
  double norm_scale = 1.0;   // kappa: word scale s drawn uniform on (0, kappa]
  std::int64_t tokens = 0;   // T, total corpus length
  std::int64_t tokens_per_document = 1000;
  std::uint64_t seed = 12345;

  bool valid() const {
    return vocab_size >= dim && dim >= 1 && step_bound >= 0.0 &&
           norm_scale > 0.0 && tokens >= 0 && tokens_per_document >= 1;
  }
};

// The generator's true word vectors: row i = s_i * vhat_i where vhat_i is a
// uniformly random direction scaled to norm sqrt(d), so |row_i| = s_i*sqrt(d)
// <= kappa*sqrt(d).
struct GroundTruthModel {
  Matrix true_vectors;
  std::vector<double> scales;  // s_i in (0, kappa]
};

GroundTruthModel sample_ground_truth(const WalkConfig& cfg, Rng& rng);

// One step of the slow discourse walk: normalize(c + delta) with delta drawn
// uniformly from the ball of radius epsilon_2/(2*sqrt(d)), which keeps the
// post-normalization displacement within epsilon_2/sqrt(d). The bound is
// asserted at runtime.
std::vector<double> step_discourse(std::span<const double> c, double step_bound,
                                   int dim, Rng& rng);

// Samples a word id with probability proportional to exp(w_i . c), computed
// with max subtraction.
std::int32_t emit_word(std::span<const double> c, const GroundTruthModel& truth,
                       Rng& rng);

struct GeneratedCorpus {
  std::vector<std::vector<std::int32_t>> documents;  // token ids per document
};

// Runs the walk from a uniform unit-sphere start, alternating emission and
// drift for cfg.tokens steps.
GeneratedCorpus generate_corpus(const WalkConfig& cfg,
                                const GroundTruthModel& truth);

// Serializes documents as lines of `w<id>` tokens, and the ground-truth
// vectors in the embedding file format (no bias sidecar).
void write_corpus(const GeneratedCorpus& corpus, const std::string& path);
void write_truth(const GroundTruthModel& truth, const std::string& path);

}  // namespace kway::genwalk
