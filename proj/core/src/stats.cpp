#include "subq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace subq {

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double quantile(std::span<const double> xs, double p) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;  // 0-based rank
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Interval naive_t_interval(std::span<const double> outputs, double alpha) {
  const std::size_t n = outputs.size();
  if (n < 2) throw std::invalid_argument("naive_t_interval: need n >= 2");
  const double m = mean(outputs);
  const double s = std::sqrt(sample_variance(outputs));
  if (s == 0.0) return {m, m};
  boost::math::students_t_distribution<double> t(static_cast<double>(n - 1));
  const double tq = boost::math::quantile(t, 1.0 - alpha / 2.0);
  const double half = tq * s / std::sqrt(static_cast<double>(n));
  return {m - half, m + half};
}

QuantileCI quantile_ci(std::span<const double> config_means, double alpha) {
  if (config_means.size() < 2)
    throw std::invalid_argument("quantile_ci: need at least 2 means");
  QuantileCI ci;
  ci.alpha = alpha;
  ci.lower = quantile(config_means, alpha / 2.0);
  ci.upper = quantile(config_means, 1.0 - alpha / 2.0);
  return ci;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace subq
