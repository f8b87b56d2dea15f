#include "kway/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kway::stats {

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("variance needs >= 2 samples");
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    // Positions i..j-1 (0-based) share the mean of ranks i+1..j.
    double r = static_cast<double>(i + j + 1) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
    i = j;
  }
  return ranks;
}

namespace {

double pearson_or_nan(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = mean(x);
  double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("spearman: need >= 2 pairs");
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  double rho = pearson_or_nan(rx, ry);
  if (std::isnan(rho)) return std::nullopt;
  return rho;
}

FisherTest fisher_rho_test(double rho, std::int64_t n) {
  if (std::abs(rho) >= 1.0)
    throw std::invalid_argument("fisher transform undefined at |rho| = 1");
  if (n < 4) throw std::invalid_argument("fisher test needs n >= 4");
  FisherTest t;
  t.z = std::atanh(rho) * std::sqrt(static_cast<double>(n - 3));
  t.p = 2.0 * normal_sf(std::abs(t.z));
  return t;
}

FisherTest fisher_rho_test(double rho1, std::int64_t n1, double rho2,
                           std::int64_t n2) {
  if (std::abs(rho1) >= 1.0 || std::abs(rho2) >= 1.0)
    throw std::invalid_argument("fisher transform undefined at |rho| = 1");
  if (n1 < 4 || n2 < 4) throw std::invalid_argument("fisher test needs n >= 4");
  FisherTest t;
  double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) +
                        1.0 / static_cast<double>(n2 - 3));
  t.z = (std::atanh(rho1) - std::atanh(rho2)) / se;
  t.p = 2.0 * normal_sf(std::abs(t.z));
  return t;
}

namespace {

double log_binom(std::int64_t n, std::int64_t j) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(j) + 1.0) -
         std::lgamma(static_cast<double>(n - j) + 1.0);
}

double binomial_sum(std::int64_t from, std::int64_t to, std::int64_t n, double p) {
  if (p <= 0.0) return from <= 0 ? 1.0 : 0.0;
  if (p >= 1.0) return to >= n ? 1.0 : 0.0;
  double lp = std::log(p);
  double lq = std::log1p(-p);
  double s = 0.0;
  for (std::int64_t j = from; j <= to; ++j) {
    s += std::exp(log_binom(n, j) + static_cast<double>(j) * lp +
                  static_cast<double>(n - j) * lq);
  }
  return std::min(s, 1.0);
}

}  // namespace

double binomial_tail_upper(std::int64_t s, std::int64_t n, double p) {
  if (s <= 0) return 1.0;
  return binomial_sum(s, n, n, p);
}

double binomial_tail_lower(std::int64_t s, std::int64_t n, double p) {
  if (s >= n) return 1.0;
  return binomial_sum(0, s, n, p);
}

Interval clopper_pearson_interval(std::int64_t successes, std::int64_t trials,
                                  double alpha) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw std::invalid_argument("clopper_pearson: need 0 <= s <= n, n >= 1");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("clopper_pearson: need 0 < alpha < 1");

  constexpr double kTol = 1e-10;
  const double half = alpha / 2.0;
  Interval iv;

  if (successes == 0) {
    iv.lower = 0.0;
  } else {
    // P(X >= s; p) grows with p; find where it crosses alpha/2.
    double lo = 0.0, hi = 1.0;
    while (hi - lo > kTol) {
      double mid = 0.5 * (lo + hi);
      if (binomial_tail_upper(successes, trials, mid) < half) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    iv.lower = 0.5 * (lo + hi);
  }

  if (successes == trials) {
    iv.upper = 1.0;
  } else {
    // P(X <= s; p) falls with p.
    double lo = 0.0, hi = 1.0;
    while (hi - lo > kTol) {
      double mid = 0.5 * (lo + hi);
      if (binomial_tail_lower(successes, trials, mid) > half) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    iv.upper = 0.5 * (lo + hi);
  }
  return iv;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 3.0e-14;

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double fpmin = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_p domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi_squared_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

}  // namespace kway::stats
