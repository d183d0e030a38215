#pragma once

#include <vector>

namespace cct {

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth);

/// Incremental learning accuracy: the plain mean of per-iteration test
/// accuracies. Errors on an empty series.
double ila(const std::vector<double>& per_iteration_accuracy);

/// Chance-corrected partition agreement via the contingency-table formula.
/// Invariant under label permutation of either argument.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct AnovaResult {
  double f_statistic;
  double p_value;
};

/// One-way ANOVA. A degenerate case with zero within-group variance and a
/// nonzero between-group spread reports F = +inf, p = 0.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

/// I_x(a, b) via Lentz's continued fraction, tolerance 1e-10, 200 iteration
/// cap; throws if the fraction fails to converge.
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail of the F(df1, df2) distribution at the given statistic.
double f_survival(double f_statistic, double df1, double df2);

}  // namespace cct
