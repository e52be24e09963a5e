#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace subq {

namespace detail {

// splitmix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Counter-based, hierarchically splittable random stream. A stream is fully
/// determined by (root_seed, path); deriving a child never mutates the parent,
/// so results are independent of thread scheduling.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t root_seed)
      : root_seed_(root_seed), key_(detail::mix64(root_seed + detail::kGolden)) {}

  [[nodiscard]] RandomStream derive(std::uint64_t child_index) const {
    RandomStream child(*this);
    child.path_.push_back(child_index);
    child.key_ = detail::mix64(detail::mix64(key_ ^ 0xD1B54A32D192ED03ULL) +
                               (child_index + 1) * detail::kGolden);
    child.counter_ = 0;
    return child;
  }

  std::uint64_t root_seed() const { return root_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t next_u64() {
    return detail::mix64(key_ + (++counter_) * detail::kGolden);
  }

  /// Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard Box-Muller; one value per call, nothing cached.
  double next_normal(double mean = 0.0, double sd = 1.0) {
    double u1 = next_uniform();
    double u2 = next_uniform();
    // avoid log(0)
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  double next_exponential(double rate) {
    double u = next_uniform();
    return -std::log1p(-u) / rate;
  }

  /// Marsaglia-Tsang; shape < 1 handled via the boosting identity.
  double next_gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0)
      throw std::invalid_argument("next_gamma: shape and rate must be positive");
    if (shape < 1.0) {
      double u = next_uniform();
      if (u <= 0.0) u = 0x1.0p-53;
      return next_gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = next_uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  /// Inverse-CDF draw over a probability vector; ties in cumulative bins
  /// resolve to the lower index.
  int next_categorical(std::span<const double> probs) {
    double u = next_uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    // guard against rounding in the final bin
    for (std::size_t i = probs.size(); i-- > 0;)
      if (probs[i] > 0.0) return static_cast<int>(i);
    return static_cast<int>(probs.size()) - 1;
  }

  // UniformRandomBitGenerator interface
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t root_seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::vector<std::uint64_t> path_;
};

}  // namespace subq
