#pragma once

#include <any>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "subq/errors.hpp"
#include "subq/random.hpp"

namespace subq {

enum class SubmodelKind {
  Deterministic,            // Y = g(X)
  UnconditionalStochastic,  // Y = g(xi)
  ConditionalStochastic,    // Y = g(X, xi)
};

enum class ProvenanceTag { Estimated, Bootstrap, Posterior, True };

struct Provenance {
  ProvenanceTag tag = ProvenanceTag::Estimated;
  std::uint64_t seed = 0;
};

// ---- fitted-parameter payloads -------------------------------------------

struct NormalParams {
  double mean = 0.0;
  double sd = 1.0;
};

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
  double mean() const { return shape / rate; }
};

/// Piecewise-constant rates, one per period; queried cyclically by period
/// index. Rates are per unit of the period length chosen by the owner.
struct PiecewiseRateParams {
  std::vector<double> rates;
};

/// Two Gamma marginals coupled through a Gaussian copula on normal scores.
struct CopulaParams {
  GammaParams first;
  GammaParams second;
  double rho = 0.0;
};

/// 1-d nearest-neighbour regressor: stores the training pairs, predicts with
/// inverse-distance weights over the k nearest, constant beyond the range.
struct KnnParams {
  std::vector<double> x;  // sorted ascending
  std::vector<double> y;  // aligned with x
  int k = 5;
};

/// Polynomial (ascending coefficients) plus an optional sin term.
struct PolyParams {
  std::vector<double> coeffs;
  double sin_coeff = 0.0;
};

/// Multinomial logistic over `classes` actions; class 0 is the baseline.
/// Weights are (classes-1) x (features+1), row-major, bias last.
/// `cov` (optional) is the Laplace covariance of the stacked weight vector.
struct LogisticParams {
  int classes = 2;
  int features = 0;
  std::vector<double> weights;
  std::vector<double> cov;  // empty unless fitted with a Laplace approximation

  int weight_count() const { return (classes - 1) * (features + 1); }
};

enum class RoutingTrigger { ContactTriggered, ExpertTriggered };

/// Reference rules-based routing logic (benchmark/oracle use only).
struct TrueRoutingParams {
  RoutingTrigger trigger = RoutingTrigger::ContactTriggered;
};

using SubmodelParams =
    std::variant<NormalParams, GammaParams, PiecewiseRateParams, CopulaParams,
                 KnnParams, PolyParams, LogisticParams, TrueRoutingParams>;

// ---- instances & datasets -------------------------------------------------

/// One fitted/resampled realization of a submodel, invokable inside a
/// simulation replication. Immutable after construction.
struct SubmodelInstance {
  int submodel_id = 0;   // 1..L
  int instance_id = 0;   // 1..B
  SubmodelKind kind = SubmodelKind::Deterministic;
  Provenance provenance;
  SubmodelParams params;
};

struct TrainingRecord {
  std::optional<std::vector<double>> input;
  std::vector<double> output;
};

struct TrainingDataset {
  int submodel_id = 0;
  std::vector<TrainingRecord> records;

  std::size_t size() const { return records.size(); }
};

/// Invoke an instance: returns g(X), g(xi) or g(X, xi) depending on kind.
/// Deterministic instances consume no randomness. Throws MissingInput /
/// UnexpectedInput when input presence violates the kind.
std::vector<double> invoke(const SubmodelInstance& instance,
                           const std::vector<double>* input,
                           RandomStream& stream);

/// Evaluate the multinomial logistic probabilities for a feature vector.
std::vector<double> logistic_probs(const LogisticParams& p,
                                   std::span<const double> features);

// ---- simulation-model contract ---------------------------------------------

/// Hot-startable system state for the digital-twin setting. `payload` is
/// model-specific and validated by the owning SimulationModel.
struct StateSnapshot {
  int state_id = 0;
  double clock = 0.0;
  std::any payload;
  std::optional<double> observed_kpi;
};

/// A simulation model maps (submodel instance vector, optional state, stream)
/// to a scalar KPI. Implementations must be re-entrant: every submodel slot is
/// accessed only through the supplied instance vector.
class SimulationModel {
 public:
  virtual ~SimulationModel() = default;

  virtual int submodel_count() const = 0;
  virtual std::string kpi_name() const { return "kpi"; }

  virtual double replicate(std::span<const SubmodelInstance> instances,
                           const StateSnapshot* state,
                           RandomStream& stream) const = 0;
};

}  // namespace subq
