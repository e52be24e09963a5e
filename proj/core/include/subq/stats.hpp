#pragma once

#include <span>
#include <vector>

namespace subq {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool covers(double v) const { return lower <= v && v <= upper; }
};

enum class QuantileMethod { OrderStatInterp };

struct QuantileCI {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.1;
  QuantileMethod method = QuantileMethod::OrderStatInterp;
  double width() const { return upper - lower; }
  bool covers(double v) const { return lower <= v && v <= upper; }
};

double mean(std::span<const double> xs);

/// Sample variance with the 1/(n-1) divisor.
double sample_variance(std::span<const double> xs);

/// Empirical p-quantile with linear interpolation between order statistics
/// at rank h = (N-1)p + 1.
double quantile(std::span<const double> xs, double p);

/// mean +/- t_{alpha/2, n-1} * s / sqrt(n)
Interval naive_t_interval(std::span<const double> outputs, double alpha);

/// Two-sided empirical quantile interval over per-configuration means.
QuantileCI quantile_ci(std::span<const double> config_means, double alpha);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS statistic against a cdf given as callable on sorted data.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf cdf);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace subq

// ---- template impl ----------------------------------------------------------

#include <algorithm>
#include <cmath>

namespace subq {

template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace subq
