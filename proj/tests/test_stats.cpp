#include <doctest.h>

#include <cmath>

#include "subq/random.hpp"
#include "subq/stats.hpp"

using namespace subq;

TEST_CASE("quantile interpolation on 1..10 at level 0.2") {
  std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto ci = quantile_ci(xs, 0.2);
  CHECK(ci.lower == doctest::Approx(1.9).epsilon(1e-12));
  CHECK(ci.upper == doctest::Approx(9.1).epsilon(1e-12));
}

TEST_CASE("quantile interval on constants is degenerate") {
  std::vector<double> xs(8, 3.5);
  const auto ci = quantile_ci(xs, 0.1);
  CHECK(ci.lower == doctest::Approx(3.5));
  CHECK(ci.upper == doctest::Approx(3.5));
}

TEST_CASE("quantile interval width grows with confidence") {
  std::vector<double> xs;
  RandomStream s(99);
  for (int i = 0; i < 40; ++i) xs.push_back(s.next_normal());
  double prev = -1.0;
  for (double alpha : {0.5, 0.4, 0.3, 0.2, 0.1, 0.05}) {
    const auto ci = quantile_ci(xs, alpha);
    CHECK(ci.width() >= prev);
    prev = ci.width();
  }
}

TEST_CASE("t-interval on a constant sample collapses") {
  std::vector<double> xs{1, 1, 1, 1};
  const auto ci = naive_t_interval(xs, 0.1);
  CHECK(ci.lower == doctest::Approx(1.0));
  CHECK(ci.upper == doctest::Approx(1.0));
}

TEST_CASE("t-interval with one degree of freedom") {
  std::vector<double> xs{0, 2};
  const auto ci = naive_t_interval(xs, 0.05);
  // 1 +/- t_{0.025,1} * s/sqrt(2), with s = sqrt(2): half-width 12.7062...
  CHECK(ci.lower == doctest::Approx(-11.7062).epsilon(1e-4));
  CHECK(ci.upper == doctest::Approx(13.7062).epsilon(1e-4));
}

TEST_CASE("mean and sample variance basics") {
  std::vector<double> xs{1, 2, 3, 4};
  CHECK(mean(xs) == doctest::Approx(2.5));
  CHECK(sample_variance(xs) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("quantile endpoints match order statistics") {
  std::vector<double> xs{5, 1, 3};
  CHECK(quantile(xs, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(xs, 1.0) == doctest::Approx(5.0));
  CHECK(quantile(xs, 0.5) == doctest::Approx(3.0));
}

TEST_CASE("two-sample KS statistic on identical samples is zero") {
  std::vector<double> a{1, 2, 3};
  CHECK(ks_two_sample(a, a) == doctest::Approx(0.0));
}

TEST_CASE("one-sample KS against the true uniform cdf is small") {
  RandomStream s(3);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = s.next_uniform();
  const double d = ks_one_sample(xs, [](double x) { return x; });
  CHECK(d < 1.628 / std::sqrt(20000.0));
}

TEST_CASE("pearson correlation of a perfect line is one") {
  std::vector<double> a{1, 2, 3, 4};
  std::vector<double> b{2, 4, 6, 8};
  CHECK(pearson_correlation(a, b) == doctest::Approx(1.0));
}
