#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kway::stats {

// log(sum exp(v[i])) with max subtraction.
double log_sum_exp(std::span<const double> v);

double mean(std::span<const double> v);
// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> v);

// 1-based ranks; ties receive the mean of their rank range.
std::vector<double> average_ranks(std::span<const double> v);

// Pearson correlation of average ranks. Returns nullopt when either side has
// zero rank variance (all values tied), which leaves the coefficient
// undefined.
std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y);

struct FisherTest {
  double z = 0.0;
  double p = 1.0;  // two-sided
};

// One-sample form: z = atanh(rho) * sqrt(n - 3).
FisherTest fisher_rho_test(double rho, std::int64_t n);
// Two-sample form: z = (atanh r1 - atanh r2) / sqrt(1/(n1-3) + 1/(n2-3)).
FisherTest fisher_rho_test(double rho1, std::int64_t n1, double rho2,
                           std::int64_t n2);

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

// Exact binomial confidence interval. The lower endpoint solves
// P(X >= s; p) = alpha/2 (0 when s = 0) and the upper solves
// P(X <= s; p) = alpha/2 (1 when s = n), each by bisection to 1e-10.
Interval clopper_pearson_interval(std::int64_t successes, std::int64_t trials,
                                  double alpha);

double binomial_tail_upper(std::int64_t s, std::int64_t n, double p);  // P(X>=s)
double binomial_tail_lower(std::int64_t s, std::int64_t n, double p);  // P(X<=s)

double normal_sf(double z);  // standard normal upper tail

// Regularized incomplete gamma functions (series / continued fraction).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double chi_squared_sf(double x, double df);

}  // namespace kway::stats
