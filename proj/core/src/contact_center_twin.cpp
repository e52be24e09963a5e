#include "subq/contact_center.hpp"

#include <cmath>

namespace subq {

TwinResult run_twin_experiment(TwinMode mode, const CenterConfig& config,
                               const TwinOptions& options, RandomStream root) {
  const ContactCenterModel model(config);
  const HarnessOptions harness{.threads = options.threads};

  // one observed day under the reference mechanisms
  const auto truth = center_true_instances(config);
  const DayResult day = simulate_day(config, truth, root.derive(0));
  const auto training = collect_training(day.logs, config);

  const bool bayesian = mode == TwinMode::Bayesian;
  const auto fitters = center_fitters(config, bayesian);

  ResamplePlan plan;
  plan.B = options.B;
  plan.seed = root.root_seed();
  if (bayesian) {
    plan.mode = ResampleMode::PosteriorExactConjugate;
    for (int id : {3, 4, 5, 6})
      plan.mode_overrides[id] = ResampleMode::PosteriorNormalApprox;
  } else {
    plan.mode = ResampleMode::BootstrapPaired;
  }
  const auto instances =
      sample_instances(plan, fitters, training, root.derive(1));

  std::vector<SubmodelInstance> point_estimates(kCenterSubmodels);
  for (std::size_t l = 0; l < kCenterSubmodels; ++l)
    point_estimates[l] = fit(fitters[l], training[l]);

  TwinResult result;
  result.mode = mode;
  result.su_tables =
      per_state_experiment(model, instances, day.snapshots, options.B,
                           options.S, options.n, root.derive(2), harness);

  RandomStream truth_root = root.derive(3);
  RandomStream nosu_root = root.derive(4);
  RandomStream bag_root = root.derive(5);
  std::vector<double> observed;
  for (std::size_t i = 0; i < day.snapshots.size(); ++i) {
    const StateSnapshot& snap = day.snapshots[i];
    observed.push_back(*snap.observed_kpi);

    EpochSummary summary;
    summary.epoch = snap.state_id;
    summary.observed = *snap.observed_kpi;

    const auto truth_table =
        run_true_baseline(model, truth, options.truth_replications,
                          truth_root.derive(i), &snap, harness);
    summary.truth_mean = truth_table.grand_mean;
    summary.truth_se =
        std::sqrt(sample_variance(truth_table.outputs[0]) /
                  static_cast<double>(options.truth_replications));

    const auto nosu_table =
        run_true_baseline(model, point_estimates, options.nosu_replications,
                          nosu_root.derive(i), &snap, harness);
    summary.nosu_ci = naive_t_interval(nosu_table.outputs[0], options.alpha);

    summary.su_ci =
        quantile_ci(result.su_tables[i].config_means, options.alpha);
    result.epochs.push_back(std::move(summary));

    result.per_state_importance.push_back(
        bagged_importance(merge_duplicate_configs(result.su_tables[i]),
                          options.bag_trees, BagWeighting::Uniform,
                          bag_root.derive(i)));
  }

  result.aggregate_uniform =
      aggregate_importance(result.per_state_importance, StateWeighting::Uniform);
  result.aggregate_tss_weighted = aggregate_importance(
      result.per_state_importance, StateWeighting::AvgTssWeighted);
  result.bias = state_average_bias(result.su_tables, observed, options.alpha);
  return result;
}

}  // namespace subq
