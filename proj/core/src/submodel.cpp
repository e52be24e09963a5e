#include "subq/submodel.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace subq {

namespace {

bool wants_input(SubmodelKind kind) {
  return kind == SubmodelKind::Deterministic ||
         kind == SubmodelKind::ConditionalStochastic;
}

double knn_predict(const KnnParams& p, double query) {
  // constant extrapolation outside the training range
  const double x = std::clamp(query, p.x.front(), p.x.back());
  const int m = static_cast<int>(p.x.size());
  const int k = std::min(p.k, m);

  // nearest k by |x - xi| around the insertion point
  auto it = std::lower_bound(p.x.begin(), p.x.end(), x);
  int hi = static_cast<int>(it - p.x.begin());
  int lo = hi - 1;
  double wsum = 0.0, ysum = 0.0;
  bool exact = false;
  double exact_sum = 0.0;
  int exact_cnt = 0;
  for (int taken = 0; taken < k; ++taken) {
    int idx;
    if (lo < 0) idx = hi++;
    else if (hi >= m) idx = lo--;
    else if (x - p.x[lo] <= p.x[hi] - x) idx = lo--;
    else idx = hi++;
    double d = std::abs(x - p.x[idx]);
    if (d == 0.0) {
      exact = true;
      exact_sum += p.y[idx];
      ++exact_cnt;
    } else if (!exact) {
      wsum += 1.0 / d;
      ysum += p.y[idx] / d;
    }
  }
  if (exact) return exact_sum / exact_cnt;
  return ysum / wsum;
}

double poly_eval(const PolyParams& p, double x) {
  double acc = 0.0;
  for (std::size_t i = p.coeffs.size(); i-- > 0;) acc = acc * x + p.coeffs[i];
  if (p.sin_coeff != 0.0) acc += p.sin_coeff * std::sin(x);
  return acc;
}

std::vector<double> copula_draw(const CopulaParams& p, RandomStream& stream) {
  const double z1 = stream.next_normal();
  const double z2 = p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * stream.next_normal();
  static const boost::math::normal_distribution<double> std_normal;
  auto to_gamma = [](double z, const GammaParams& g) {
    double u = boost::math::cdf(std_normal, z);
    u = std::clamp(u, 1e-15, 1.0 - 1e-15);
    return boost::math::gamma_p_inv(g.shape, u) / g.rate;
  };
  return {to_gamma(z1, p.first), to_gamma(z2, p.second)};
}

// Reference routing rules. Feature layout (see contact_center):
//   [q1, q2, idle1, idle2, idle3, wait1, wait2, hour one-hot..., class]
// Contact-triggered output: one-hot over the 3 expert groups.
// Expert-triggered output: one-hot over the 2 contact classes.
std::vector<double> true_routing(const TrueRoutingParams& p,
                                 std::span<const double> f) {
  if (p.trigger == RoutingTrigger::ContactTriggered) {
    const int cls = static_cast<int>(std::lround(f[f.size() - 1]));  // 0 or 1
    const double idle_dedicated = f[2 + cls];
    const double idle_shared = f[4];
    std::vector<double> probs(3, 0.0);
    if (idle_dedicated > 0.0) probs[cls] = 1.0;
    else if (idle_shared > 0.0) probs[2] = 1.0;
    else throw NoFeasibleAction("true_routing: no compatible idle expert");
    return probs;
  }
  // expert-triggered: class-1 priority
  const double q1 = f[0], q2 = f[1];
  std::vector<double> probs(2, 0.0);
  if (q1 > 0.0) probs[0] = 1.0;
  else if (q2 > 0.0) probs[1] = 1.0;
  else throw NoFeasibleAction("true_routing: no waiting contact");
  return probs;
}

}  // namespace

std::vector<double> logistic_probs(const LogisticParams& p,
                                   std::span<const double> features) {
  const int d = p.features;
  std::vector<double> logits(p.classes, 0.0);  // class 0 baseline
  for (int c = 1; c < p.classes; ++c) {
    const double* w = p.weights.data() + (c - 1) * (d + 1);
    double z = w[d];  // bias
    for (int i = 0; i < d; ++i) z += w[i] * features[i];
    logits[c] = z;
  }
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double& z : logits) {
    z = std::exp(z - zmax);
    denom += z;
  }
  for (double& z : logits) z /= denom;
  return logits;
}

std::vector<double> invoke(const SubmodelInstance& instance,
                           const std::vector<double>* input,
                           RandomStream& stream) {
  const bool needs_input = wants_input(instance.kind);
  if (needs_input && input == nullptr)
    throw MissingInput("invoke: submodel kind requires an input vector");
  if (!needs_input && input != nullptr)
    throw UnexpectedInput("invoke: unconditional submodel given an input");

  return std::visit(
      [&](const auto& params) -> std::vector<double> {
        using P = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<P, NormalParams>) {
          return {stream.next_normal(params.mean, params.sd)};
        } else if constexpr (std::is_same_v<P, GammaParams>) {
          return {stream.next_gamma(params.shape, params.rate)};
        } else if constexpr (std::is_same_v<P, PiecewiseRateParams>) {
          // deterministic period -> rate lookup, cyclic in the period index
          const auto period = static_cast<std::size_t>((*input)[0]);
          return {params.rates[period % params.rates.size()]};
        } else if constexpr (std::is_same_v<P, CopulaParams>) {
          return copula_draw(params, stream);
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return {knn_predict(params, (*input)[0])};
        } else if constexpr (std::is_same_v<P, PolyParams>) {
          return {poly_eval(params, (*input)[0])};
        } else if constexpr (std::is_same_v<P, LogisticParams>) {
          return logistic_probs(params, *input);
        } else {
          static_assert(std::is_same_v<P, TrueRoutingParams>);
          return true_routing(params, *input);
        }
      },
      instance.params);
}

}  // namespace subq
