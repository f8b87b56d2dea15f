#include "kway/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "kway/stats.hpp"

namespace kway::verifier {

double log_partition(const Matrix& vectors, std::span<const double> context) {
  std::vector<double> logits(static_cast<std::size_t>(vectors.rows));
  for (std::int64_t i = 0; i < vectors.rows; ++i)
    logits[static_cast<std::size_t>(i)] = dot(vectors.row(i), context);
  return stats::log_sum_exp(logits);
}

namespace {

// Z_c^k as (sum exp(l - m))^k * exp(k m). Staying out of log space for the
// final value keeps constant-logit inputs exact (Z_c = n, zero spread).
double partition_value(const Matrix& vectors, std::span<const double> context,
                       int order) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < vectors.rows; ++i)
    max_logit = std::max(max_logit, dot(vectors.row(i), context));
  double scaled_sum = 0.0;
  for (std::int64_t i = 0; i < vectors.rows; ++i)
    scaled_sum += std::exp(dot(vectors.row(i), context) - max_logit);
  return std::pow(scaled_sum, static_cast<double>(order)) *
         std::exp(static_cast<double>(order) * max_logit);
}

}  // namespace

ConcentrationReport partition_values(const Matrix& vectors, std::size_t contexts,
                                     int order, Rng& rng) {
  if (contexts < 2) throw std::invalid_argument("need at least 2 contexts");
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (vectors.rows < 1) throw std::invalid_argument("empty vector table");

  const int d = static_cast<int>(vectors.cols);
  ConcentrationReport report;
  report.order = order;
  report.values.reserve(contexts);

  for (std::size_t s = 0; s < contexts; ++s) {
    auto c = rng.unit_sphere(d);
    double value = partition_value(vectors, c, order);
    if (!std::isfinite(value)) {
      throw std::runtime_error("partition value overflowed for order " +
                               std::to_string(order));
    }
    report.values.push_back(value);
  }

  report.mean = stats::mean(report.values);
  double sd = std::sqrt(stats::sample_variance(report.values));
  report.cv = sd / report.mean;
  report.standardized.reserve(contexts);
  for (double v : report.values)
    report.standardized.push_back(sd == 0.0 ? 0.0 : (v - report.mean) / sd);
  return report;
}

CorrelationReport norm_frequency_correlation(const Matrix& vectors,
                                             const miner::FrequentSetTable& table,
                                             std::size_t sample, Rng& rng) {
  if (table.sets.empty()) throw std::invalid_argument("empty frequent-set table");

  std::vector<std::size_t> picked;
  if (sample >= table.sets.size()) {
    picked.resize(table.sets.size());
    for (std::size_t i = 0; i < picked.size(); ++i) picked[i] = i;
  } else {
    // Partial Fisher-Yates: the first `sample` entries are a uniform draw
    // without replacement.
    std::vector<std::size_t> idx(table.sets.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < sample; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    picked.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(sample));
  }

  CorrelationReport report;
  report.sample_size = picked.size();
  report.pairs.reserve(picked.size());
  std::vector<double> sum(static_cast<std::size_t>(vectors.cols));
  for (std::size_t i : picked) {
    const auto& set = table.sets[i];
    std::fill(sum.begin(), sum.end(), 0.0);
    for (auto id : set.ids) {
      if (id < 0 || id >= vectors.rows)
        throw std::invalid_argument("set references id " + std::to_string(id) +
                                    " outside the vector table");
      auto row = vectors.row(id);
      for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += row[c];
    }
    report.pairs.emplace_back(std::log(static_cast<double>(set.count)),
                              squared_norm(sum));
  }

  std::vector<double> xs(report.pairs.size()), ys(report.pairs.size());
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    xs[i] = report.pairs[i].first;
    ys[i] = report.pairs[i].second;
  }
  if (report.pairs.size() < 2) {
    report.degenerate = true;
    return report;
  }
  auto rho = stats::spearman(xs, ys);
  if (!rho.has_value()) {
    report.degenerate = true;
    return report;
  }
  report.rho = *rho;
  if (report.sample_size >= 4 && std::abs(report.rho) < 1.0) {
    auto t = stats::fisher_rho_test(report.rho,
                                    static_cast<std::int64_t>(report.sample_size));
    report.has_significance = true;
    report.fisher_z = t.z;
    report.p_value = t.p;
  }
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_histogram_csv(const ConcentrationReport& report, std::ostream& out) {
  out << "standardized_value\n";
  for (double v : report.standardized) out << fmt(v) << '\n';
}

void write_scatter_csv(const CorrelationReport& report, std::ostream& out) {
  out << "ln_count,sq_norm\n";
  for (const auto& [x, y] : report.pairs) out << fmt(x) << ',' << fmt(y) << '\n';
}

void write_concentration_summary(const ConcentrationReport& report,
                                 std::ostream& out) {
  out << "{\n"
      << "  \"order\": " << report.order << ",\n"
      << "  \"contexts\": " << report.values.size() << ",\n"
      << "  \"mean\": " << fmt(report.mean) << ",\n"
      << "  \"cv\": " << fmt(report.cv) << "\n"
      << "}\n";
}

void write_correlation_summary(const CorrelationReport& report,
                               std::ostream& out) {
  out << "{\n"
      << "  \"sample_size\": " << report.sample_size << ",\n"
      << "  \"spearman_rho\": " << (report.degenerate ? "null" : fmt(report.rho))
      << ",\n"
      << "  \"degenerate_ranks\": " << (report.degenerate ? "true" : "false")
      << ",\n";
  if (report.has_significance) {
    out << "  \"fisher_z\": " << fmt(report.fisher_z) << ",\n"
        << "  \"p_value\": " << fmt(report.p_value) << "\n";
  } else {
    out << "  \"fisher_z\": null,\n  \"p_value\": null\n";
  }
  out << "}\n";
}

}  // namespace kway::verifier
