#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kway/trainer.hpp"

namespace kway::eval {

using trainer::EmbeddingModel;

struct SimilarityRow {
  std::string word1, word2;
  double rating = 0.0;
};
struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityRow> rows;
};

struct AnalogyRow {
  std::string a, b, c, gold;
};
struct AnalogyDataset {
  std::string name;
  std::vector<AnalogyRow> rows;
};

struct RelationRow {
  std::string relation, word1, word2;
};
struct RelationDataset {
  std::string name;
  std::vector<RelationRow> rows;
};

struct TextRow {
  int label = 0;  // 0 or 1
  std::vector<std::string> tokens;
};
struct TextDataset {
  std::string name;
  std::vector<TextRow> train;
  std::vector<TextRow> test;
};

struct EvalReport {
  std::string dataset;
  std::string metric;  // "spearman" or "accuracy"
  double value = 0.0;
  double coverage = 1.0;  // fraction of rows usable with this vocabulary
  std::string notes;
};

// u.v / (|u||v|), with the convention that a zero vector scores 0 against
// anything. Dimension mismatch throws.
double cosine(std::span<const double> u, std::span<const double> v);

// Spearman correlation of cosine similarities against human ratings; rows
// with an out-of-vocabulary word are dropped and counted against coverage.
EvalReport eval_similarity(const EmbeddingModel& model,
                           const SimilarityDataset& ds);

// CosAdd: rank all words except {a, b, c} by cosine with b - a + c, ties
// broken by lower word id. A row whose gold word is one of the query words is
// unanswerable and leaves the denominator.
EvalReport eval_analogy_cosadd(const EmbeddingModel& model,
                               const AnalogyDataset& ds);

// DiffVec 1-NN over relation offsets w2 - w1: each row votes with its nearest
// other row by cosine of offsets, ties broken by lowest row index.
EvalReport eval_relation_diffvec(const EmbeddingModel& model,
                                 const RelationDataset& ds);

// Mean of the in-vocabulary token embeddings, with multiplicity; nullopt when
// every token is out of vocabulary.
std::optional<std::vector<double>> centroid(const EmbeddingModel& model,
                                            std::span<const std::string> tokens);

struct LogRegModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

// Full-batch gradient descent on mean log-loss from zero weights; no
// regularization, fixed step size, deterministic.
LogRegModel train_logreg(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, int epochs = 500,
                         double lr = 0.1);
double logreg_probability(const LogRegModel& m, std::span<const double> x);
double logreg_mean_loss(const LogRegModel& m,
                        const std::vector<std::vector<double>>& features,
                        const std::vector<int>& labels);

// Trains on centroids of the train rows and reports test accuracy; rows with
// no in-vocabulary token are dropped and counted against coverage.
EvalReport eval_textclass(const EmbeddingModel& model, const TextDataset& ds,
                          int epochs = 500, double lr = 0.1);

// Affine map of ratings onto [0,1] per dataset; all-equal ratings map to 0.5.
SimilarityDataset normalize_ratings(const SimilarityDataset& ds);

struct DivergencePair {
  std::string word1, word2;
  double score_a = 0.0;  // standardized to mean 0.5, variance 1
  double score_b = 0.0;
  double rating = 0.0;  // normalized human rating
  double difference = 0.0;
};

// Standardizes both models' cosine scores over the shared in-vocabulary pairs
// to mean 0.5 and unit variance, and selects pairs whose score difference
// exceeds one standard deviation of the difference distribution, sorted by
// descending |difference|.
std::vector<DivergencePair> divergence_report(const EmbeddingModel& model_a,
                                              const EmbeddingModel& model_b,
                                              const SimilarityDataset& pooled);

// TSV readers; names usually come from the file stem.
SimilarityDataset read_similarity(const std::string& path, std::string name);
AnalogyDataset read_analogy(const std::string& path, std::string name);
RelationDataset read_relation(const std::string& path, std::string name);
TextDataset read_textclass(const std::string& train_path,
                           const std::string& test_path, std::string name);

// `dataset<TAB>metric<TAB>value<TAB>coverage`
void write_report(const EvalReport& report, std::ostream& out);

}  // namespace kway::eval
