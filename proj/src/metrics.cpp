#include "cct/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace cct {

namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

// Continued-fraction kernel from Lentz's algorithm, as in the standard
// betacf formulation.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 200;
  constexpr double kTolerance = 1e-10;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTolerance) {
      return h;
    }
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("accuracy: empty inputs");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double ila(const std::vector<double>& per_iteration_accuracy) {
  if (per_iteration_accuracy.empty()) {
    throw std::invalid_argument("ila: empty accuracy series");
  }
  const double total = std::accumulate(per_iteration_accuracy.begin(),
                                       per_iteration_accuracy.end(), 0.0);
  return total / static_cast<double>(per_iteration_accuracy.size());
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("adjusted_rand_index: length mismatch");
  }
  if (a.empty()) {
    throw std::invalid_argument("adjusted_rand_index: empty labelings");
  }

  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> row_totals;
  std::map<int, double> col_totals;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    row_totals[a[i]] += 1.0;
    col_totals[b[i]] += 1.0;
  }

  double sum_cells = 0.0;
  for (const auto& [key, count] : cells) sum_cells += choose2(count);
  double sum_rows = 0.0;
  for (const auto& [label, count] : row_totals) sum_rows += choose2(count);
  double sum_cols = 0.0;
  for (const auto& [label, count] : col_totals) sum_cols += choose2(count);

  const double total_pairs = choose2(static_cast<double>(a.size()));
  const double expected = sum_rows * sum_cols / total_pairs;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  const double denominator = maximum - expected;
  if (denominator == 0.0) {
    // Both partitions degenerate in the same way (all-singleton or all-one).
    return 1.0;
  }
  return (sum_cells - expected) / denominator;
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw std::invalid_argument("anova: need at least 2 groups");
  }
  std::size_t n_total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) {
      throw std::invalid_argument("anova: each group needs at least 2 observations");
    }
    n_total += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand_mean = grand_sum / static_cast<double>(n_total);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double mean =
        std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    for (double v : g) {
      ss_within += (v - mean) * (v - mean);
    }
  }

  const double df1 = static_cast<double>(groups.size() - 1);
  const double df2 = static_cast<double>(n_total - groups.size());
  const double ms_between = ss_between / df1;
  const double ms_within = ss_within / df2;

  if (ms_within == 0.0) {
    if (ms_between == 0.0) {
      return {0.0, 1.0};
    }
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  const double f = ms_between / ms_within;
  return {f, f_survival(f, df1, df2)};
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("incomplete beta: a and b must be positive");
  }
  if (x < 0.0 || x > 1.0) {
    throw std::invalid_argument("incomplete beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_prefix = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
  const double prefix = std::exp(log_prefix);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return prefix * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - prefix * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_survival(double f_statistic, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0) {
    throw std::invalid_argument("f_survival: degrees of freedom must be positive");
  }
  if (f_statistic <= 0.0) return 1.0;
  if (std::isinf(f_statistic)) return 0.0;
  return regularized_incomplete_beta(0.5 * df2, 0.5 * df1,
                                     df2 / (df2 + df1 * f_statistic));
}

}  // namespace cct
