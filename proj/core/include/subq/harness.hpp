#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "subq/design.hpp"
#include "subq/submodel.hpp"

namespace subq {

/// Results of running n replications at every design row. `outputs[b']` holds
/// n * multiplicity[b'] KPI values; immutable once returned.
struct OutputTable {
  DesignMatrix design;
  int n = 0;  // replications per multiplicity unit
  std::vector<std::vector<double>> outputs;
  std::vector<double> config_means;
  double grand_mean = 0.0;
  std::optional<int> state_id;

  std::size_t total_replications() const;
};

struct HarnessOptions {
  int threads = 1;
  // reuse the replication path across configurations (common random numbers)
  bool common_random_numbers = false;
};

/// Run the designed experiment. output[b'][j] uses the stream at path
/// (b', j) under `root`, so results are independent of execution order.
OutputTable run_experiment(const SimulationModel& model,
                           const std::vector<std::vector<SubmodelInstance>>& instances,
                           const DesignMatrix& design, int n,
                           const StateSnapshot* state, RandomStream root,
                           const HarnessOptions& options = {});

/// Single-configuration run with a fixed instance vector (e.g. the true
/// submodels for a ground-truth benchmark, or the point estimates).
OutputTable run_true_baseline(const SimulationModel& model,
                              const std::vector<SubmodelInstance>& instance_vec,
                              int n, RandomStream root,
                              const StateSnapshot* state = nullptr,
                              const HarnessOptions& options = {});

/// Merge rows of the table whose design rows are identical, pooling their
/// replications; the result satisfies the deduplicated-design precondition of
/// tree growth.
OutputTable merge_duplicate_configs(const OutputTable& table);

/// CSV export: `config,replication,kpi`.
std::string output_table_to_csv(const OutputTable& table);

/// Deterministic parallel-for over [0, count): items are claimed from a
/// shared counter, so any schedule produces the same per-index work.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace subq
