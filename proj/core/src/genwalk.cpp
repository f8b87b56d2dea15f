#include "kway/genwalk.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "kway/error.hpp"
#include "kway/trainer.hpp"

namespace kway::genwalk {

GroundTruthModel sample_ground_truth(const WalkConfig& cfg, Rng& rng) {
  if (!cfg.valid()) throw std::invalid_argument("invalid walk configuration");
  GroundTruthModel truth;
  truth.true_vectors = Matrix(cfg.vocab_size, cfg.dim);
  truth.scales.resize(static_cast<std::size_t>(cfg.vocab_size));
  const double sqrt_d = std::sqrt(static_cast<double>(cfg.dim));
  for (std::int32_t i = 0; i < cfg.vocab_size; ++i) {
    auto dir = rng.unit_sphere(cfg.dim);
    // s uniform on (0, kappa]: flip [0,1) so zero scale is excluded.
    double s = cfg.norm_scale * (1.0 - rng.uniform());
    truth.scales[static_cast<std::size_t>(i)] = s;
    auto row = truth.true_vectors.row(i);
    for (int c = 0; c < cfg.dim; ++c)
      row[static_cast<std::size_t>(c)] = s * sqrt_d * dir[static_cast<std::size_t>(c)];
  }
  return truth;
}

std::vector<double> step_discourse(std::span<const double> c, double step_bound,
                                   int dim, Rng& rng) {
  const double sqrt_d = std::sqrt(static_cast<double>(dim));
  if (step_bound == 0.0) return {c.begin(), c.end()};

  auto delta = rng.ball(dim, step_bound / (2.0 * sqrt_d));
  std::vector<double> next(c.begin(), c.end());
  for (int i = 0; i < dim; ++i) next[static_cast<std::size_t>(i)] += delta[static_cast<std::size_t>(i)];
  double norm = std::sqrt(squared_norm(next));
  for (auto& x : next) x /= norm;

  double moved2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    double diff = next[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)];
    moved2 += diff * diff;
  }
  double bound = step_bound / sqrt_d;
  if (moved2 > bound * bound * (1.0 + 1e-12)) {
    throw std::runtime_error("discourse step exceeded its displacement bound");
  }
  return next;
}

std::int32_t emit_word(std::span<const double> c, const GroundTruthModel& truth,
                       Rng& rng) {
  const std::int64_t n = truth.true_vectors.rows;
  static thread_local std::vector<double> logits;
  logits.resize(static_cast<std::size_t>(n));
  double max_logit = -1e300;
  for (std::int64_t i = 0; i < n; ++i) {
    double l = dot(truth.true_vectors.row(i), c);
    logits[static_cast<std::size_t>(i)] = l;
    if (l > max_logit) max_logit = l;
  }
  double total = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - max_logit);
    total += l;
  }
  double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    acc += logits[static_cast<std::size_t>(i)];
    if (u < acc) return static_cast<std::int32_t>(i);
  }
  return static_cast<std::int32_t>(n - 1);  // u landed on the summation edge
}

GeneratedCorpus generate_corpus(const WalkConfig& cfg,
                                const GroundTruthModel& truth) {
  if (!cfg.valid()) throw std::invalid_argument("invalid walk configuration");
  GeneratedCorpus out;
  if (cfg.tokens == 0) return out;

  // Salted so the walk stream never replays the ground-truth sampling stream
  // when both derive from the same config seed.
  Rng rng(cfg.seed ^ 0xda3e39cb94b95bdbULL);
  std::vector<double> c = rng.unit_sphere(cfg.dim);
  std::vector<std::int32_t> doc;
  doc.reserve(static_cast<std::size_t>(cfg.tokens_per_document));
  for (std::int64_t t = 0; t < cfg.tokens; ++t) {
    doc.push_back(emit_word(c, truth, rng));
    if (static_cast<std::int64_t>(doc.size()) == cfg.tokens_per_document) {
      out.documents.push_back(std::move(doc));
      doc = {};
      doc.reserve(static_cast<std::size_t>(cfg.tokens_per_document));
    }
    c = step_discourse(c, cfg.step_bound, cfg.dim, rng);
  }
  if (!doc.empty()) out.documents.push_back(std::move(doc));
  return out;
}

void write_corpus(const GeneratedCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw format_error("cannot write file: " + path);
  for (const auto& doc : corpus.documents) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (i > 0) out << ' ';
      out << 'w' << doc[i];
    }
    out << '\n';
  }
}

void write_truth(const GroundTruthModel& truth, const std::string& path) {
  trainer::EmbeddingModel model;
  model.vectors = truth.true_vectors;
  model.words.reserve(static_cast<std::size_t>(truth.true_vectors.rows));
  for (std::int64_t i = 0; i < truth.true_vectors.rows; ++i)
    model.words.push_back("w" + std::to_string(i));
  trainer::write_model(model, path);
}

}  // namespace kway::genwalk
