#pragma once

#include <vector>

#include "subq/harness.hpp"
#include "subq/stats.hpp"
#include "subq/tree.hpp"

namespace subq {

enum class StateWeighting { Uniform, AvgTssWeighted };

/// State-average bias estimates across matched configurations, with the
/// quantile CI over the B' estimates.
struct StateAverageBias {
  std::vector<double> estimates;  // length B'
  QuantileCI ci;
  int state_count = 0;
};

/// For each state, build an independent stacked LH design (B' = B*S rows) on
/// its own stream branch and run the experiment hot-started from that state.
std::vector<OutputTable> per_state_experiment(
    const SimulationModel& model,
    const std::vector<std::vector<SubmodelInstance>>& instances,
    const std::vector<StateSnapshot>& states, int B, int S, int n,
    RandomStream root, const HarnessOptions& options = {});

/// Weighted mean of per-state importance scores. AvgTssWeighted uses each
/// state's mean bagged-tree TSS as its weight.
ImportanceReport aggregate_importance(const std::vector<ImportanceReport>& reports,
                                      StateWeighting weighting);

/// eta_hat[b'] = (1/N) sum_i (config mean of state i at row b' - observed y_i),
/// with the quantile CI over the B' estimates.
StateAverageBias state_average_bias(const std::vector<OutputTable>& tables,
                                    const std::vector<double>& observed,
                                    double alpha);

}  // namespace subq
