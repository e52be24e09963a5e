#pragma once

#include "subq/factorial.hpp"
#include "subq/resample.hpp"
#include "subq/stats.hpp"
#include "subq/tree.hpp"

namespace subq {

/// Ground-truth mechanisms of the four-submodel synthetic benchmark:
/// Y = p(X1) + q(X2) with known input laws and response functions.
struct SyntheticTruth {
  NormalParams x1{1.0, 0.5};
  NormalParams x2{1.0, 2.0};
  PolyParams p{{4.0, 0.0, 0.0, 3.0, 1.0, 0.0, 0.0, 1.0}, 1.0};  // x^7+x^4+3x^3+sin x+4
  PolyParams q{{0.0, 4.0, 1.0, 1.0}, 0.0};                      // x^3+x^2+4x

  /// E[Y] from Gaussian raw moments plus E[sin X] = sin(mu) e^{-sigma^2/2}.
  double analytic_mean() const;

  std::vector<SubmodelInstance> true_instances() const;
};

/// Submodel slots: 1 = X1 input, 2 = X2 input, 3 = p response, 4 = q response.
class SyntheticModel : public SimulationModel {
 public:
  int submodel_count() const override { return 4; }
  std::string kpi_name() const override { return "Y"; }
  double replicate(std::span<const SubmodelInstance> instances,
                   const StateSnapshot* state,
                   RandomStream& stream) const override;
};

struct SyntheticData {
  std::vector<TrainingDataset> per_submodel;  // aligned with slots 1..4
  std::vector<double> y;                      // realized Y per record
};

SyntheticData generate_training(std::size_t m, RandomStream& stream,
                                const SyntheticTruth& truth = {});

/// Estimators for the factorial study: Normal MLE for the two inputs,
/// k-nearest-neighbour response surfaces for p and q. Constant extrapolation
/// truncates the x^7 tail of p, which is what produces the study's signature
/// negative bias when p is estimated.
std::vector<Fitter> synthetic_fitters(int knn_k = 5);

/// Surrogate stack for the coverage and attribution experiments: a linear
/// least-squares fit for the stiff response p (misfit spreads its bootstrap
/// instances, so full submodel uncertainty genuinely widens the interval) and
/// a heavily smoothed k-NN fit for q (k = 25 damps its instance spread and
/// shrinks the no-epistemic interval), leaving the X1/p subsystem as the
/// dominant epistemic contributor.
std::vector<Fitter> surrogate_fitters();

enum class Scenario { NoEpistemic, InputOnly, FullSU };

struct SyntheticOptions {
  int macro = 100;
  int m = 50;
  int B = 100;
  int S = 1;
  int n = 50;
  double alpha = 0.1;
  int bag_trees = 50;
  int threads = 1;
};

struct CoverageResult {
  double coverage = 0.0;    // fraction of macro-rep CIs covering E[Y]
  double mean_width = 0.0;
  double width_se = 0.0;
  std::vector<Interval> intervals;
};

/// The three-scenario coverage study. NoEpistemic uses the naive t-interval;
/// the epistemic scenarios use the quantile CI over configuration means.
CoverageResult coverage_experiment(Scenario scenario,
                                   const SyntheticOptions& options,
                                   RandomStream stream);

struct ImportanceExperimentResult {
  std::vector<ImportanceReport> single;  // one per macro-replication
  std::vector<ImportanceReport> bagged;
};

/// Attribution study on one fitted world: training data, bootstrap instances,
/// and the stacked design are drawn once from `stream`; each macro-replication
/// then re-runs the simulation stage and the attribution. `single` holds the
/// score of an individual bootstrap ensemble member (a one-tree bag), `bagged`
/// the full `bag_trees`-tree average, so their variance ratio measures the
/// stabilization delivered by bagging.
ImportanceExperimentResult importance_experiment(const SyntheticOptions& options,
                                                 RandomStream stream);

struct VrfResult {
  std::vector<double> factors;  // per submodel
  std::vector<std::vector<double>> single_scores;  // macro x L
  std::vector<std::vector<double>> bagged_scores;
};

VrfResult vrf_experiment(const SyntheticOptions& options, RandomStream stream);

/// The 2^4 true-vs-estimated bias/variance study.
FactorialStudyResult synthetic_factorial(const FactorialOptions& options,
                                         int m, RandomStream stream);

}  // namespace subq
