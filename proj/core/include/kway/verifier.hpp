#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kway/matrix.hpp"
#include "kway/miner.hpp"
#include "kway/rng.hpp"

namespace kway::verifier {

// Partition values Z_c^k over sampled unit contexts. Standardization uses the
// sample (n-1) standard deviation, so the standardized values have sample
// mean 0 and sample variance 1 exactly.
struct ConcentrationReport {
  int order = 1;
  std::vector<double> values;        // Z_c^k per context
  std::vector<double> standardized;  // (value - mean) / stddev
  double mean = 0.0;
  double cv = 0.0;  // stddev / mean
};

struct CorrelationReport {
  std::size_t sample_size = 0;
  double rho = 0.0;
  bool degenerate = false;  // zero rank variance on either side
  bool has_significance = false;
  double fisher_z = 0.0;
  double p_value = 1.0;
  // (ln count, |sum of member vectors|^2) per sampled set
  std::vector<std::pair<double, double>> pairs;
};

// ln Z_c = ln sum_w exp(w . c), evaluated with max subtraction.
double log_partition(const Matrix& vectors, std::span<const double> context);

// Samples `contexts` uniform unit-sphere vectors and computes the order-k
// partition value per context. The sum over all k-tuples of exp(sum w_i . c)
// factorizes as Z_c^k with Z_c = sum_w exp(w . c); Z_c is evaluated in log
// space and the result must be finite. When every value coincides (zero
// spread) the standardized values are all zero.
ConcentrationReport partition_values(const Matrix& vectors, std::size_t contexts,
                                     int order, Rng& rng);

// Pairs ln h(S) with the squared norm of the set's summed vectors for a
// uniform without-replacement sample of the table (all sets when the table is
// smaller), and reports Spearman rho with Fisher significance. Row i of
// `vectors` must be the vector of word id i as used in the table.
CorrelationReport norm_frequency_correlation(const Matrix& vectors,
                                             const miner::FrequentSetTable& table,
                                             std::size_t sample, Rng& rng);

// Plot-ready outputs: one standardized value per line under a
// `standardized_value` header; `ln_count,sq_norm` pairs; and a small
// JSON-style summary block.
void write_histogram_csv(const ConcentrationReport& report, std::ostream& out);
void write_scatter_csv(const CorrelationReport& report, std::ostream& out);
void write_concentration_summary(const ConcentrationReport& report,
                                 std::ostream& out);
void write_correlation_summary(const CorrelationReport& report,
                               std::ostream& out);

}  // namespace kway::verifier
