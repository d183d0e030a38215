#include "cct/metrics.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace cct;

TEST_CASE("accuracy counts matches") {
  CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(accuracy({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.0));
  CHECK(accuracy({1, 2, 3, 4}, {1, 2, 3, 9}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
}

TEST_CASE("ila is the mean of the series") {
  CHECK(ila({1.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(ila({0.8, 0.6}) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(ila({0.935}) == doctest::Approx(0.935));
  CHECK_THROWS_AS(ila({}), std::invalid_argument);
}

TEST_CASE("ila properties: constant series and permutation invariance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double c = value(rng);
    CHECK(ila({c, c, c, c}) == doctest::Approx(c).epsilon(1e-12));

    std::vector<double> series(7);
    for (double& v : series) v = value(rng);
    std::vector<double> shuffled = series;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(ila(series) == doctest::Approx(ila(shuffled)).epsilon(1e-12));
  }
}

TEST_CASE("adjusted rand index reference values") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(adjusted_rand_index({0}, {0, 1}), std::invalid_argument);
}

TEST_CASE("adjusted rand index is label-permutation invariant and near zero for noise") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> label(0, 3);
  double total = 0.0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<int> a(40), b(40);
    for (auto& v : a) v = label(rng);
    for (auto& v : b) v = label(rng);
    total += adjusted_rand_index(a, b);

    std::vector<int> relabeled = a;
    for (auto& v : relabeled) v = 3 - v;
    CHECK(adjusted_rand_index(a, b) ==
          doctest::Approx(adjusted_rand_index(relabeled, b)).epsilon(1e-12));
  }
  CHECK(std::fabs(total / trials) < 0.05);
}

TEST_CASE("anova reference values") {
  const AnovaResult same = anova_oneway({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
  CHECK(same.f_statistic == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));

  const AnovaResult split = anova_oneway({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
  CHECK(split.f_statistic == doctest::Approx(13.5).epsilon(1e-12));
  CHECK(split.p_value == doctest::Approx(0.0213107).epsilon(1e-4));
}

TEST_CASE("anova p-value agrees with quadrature of the F tail") {
  const double p = f_survival(13.5, 1.0, 4.0);
  const double oracle = testing::f_pvalue_quadrature(13.5, 1.0, 4.0);
  CHECK(p == doctest::Approx(oracle).epsilon(1e-7));

  const double p2 = f_survival(3.2, 2.0, 10.0);
  const double oracle2 = testing::f_pvalue_quadrature(3.2, 2.0, 10.0);
  CHECK(p2 == doctest::Approx(oracle2).epsilon(1e-7));
}

TEST_CASE("anova degenerate and error cases") {
  const AnovaResult degenerate = anova_oneway({{2.0, 2.0}, {5.0, 5.0}});
  CHECK(std::isinf(degenerate.f_statistic));
  CHECK(degenerate.p_value == doctest::Approx(0.0));

  const AnovaResult all_equal = anova_oneway({{3.0, 3.0}, {3.0, 3.0}});
  CHECK(all_equal.f_statistic == doctest::Approx(0.0));
  CHECK(all_equal.p_value == doctest::Approx(1.0));

  CHECK_THROWS_AS(anova_oneway({{1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(anova_oneway({{1.0}, {2.0, 3.0}}), std::invalid_argument);
}

TEST_CASE("anova p decreases as F grows") {
  double previous = 1.0;
  for (double f = 0.5; f < 40.0; f *= 2.0) {
    const double p = f_survival(f, 3.0, 12.0);
    CHECK(p < previous);
    previous = p;
  }
}

TEST_CASE("regularized incomplete beta basic identities") {
  CHECK(regularized_incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2.5, 2.5, 0.5) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == doctest::Approx(0.0));
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(regularized_incomplete_beta(-1.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), std::invalid_argument);
}
