#include "subq/synthetic.hpp"

#include <cmath>

#include "subq/design.hpp"

namespace subq {

namespace {

/// Raw moments of N(mu, sd^2) via M_k = mu M_{k-1} + (k-1) sd^2 M_{k-2}.
std::vector<double> gaussian_raw_moments(double mu, double sd, int up_to) {
  std::vector<double> m(static_cast<std::size_t>(up_to) + 1);
  m[0] = 1.0;
  if (up_to >= 1) m[1] = mu;
  for (int k = 2; k <= up_to; ++k)
    m[static_cast<std::size_t>(k)] =
        mu * m[static_cast<std::size_t>(k - 1)] +
        (k - 1) * sd * sd * m[static_cast<std::size_t>(k - 2)];
  return m;
}

double poly_expectation(const PolyParams& p, const NormalParams& x) {
  const auto moments =
      gaussian_raw_moments(x.mean, x.sd, static_cast<int>(p.coeffs.size()) - 1);
  double e = 0.0;
  for (std::size_t k = 0; k < p.coeffs.size(); ++k) e += p.coeffs[k] * moments[k];
  if (p.sin_coeff != 0.0)
    e += p.sin_coeff * std::sin(x.mean) * std::exp(-0.5 * x.sd * x.sd);
  return e;
}

double eval_response(const SubmodelInstance& inst, double x,
                     RandomStream& stream) {
  const std::vector<double> in{x};
  return invoke(inst, &in, stream)[0];
}

}  // namespace

double SyntheticTruth::analytic_mean() const {
  return poly_expectation(p, x1) + poly_expectation(q, x2);
}

std::vector<SubmodelInstance> SyntheticTruth::true_instances() const {
  auto make = [](int id, SubmodelKind kind, SubmodelParams params) {
    SubmodelInstance inst;
    inst.submodel_id = id;
    inst.instance_id = 1;
    inst.kind = kind;
    inst.provenance = {ProvenanceTag::True, 0};
    inst.params = std::move(params);
    return inst;
  };
  return {make(1, SubmodelKind::UnconditionalStochastic, x1),
          make(2, SubmodelKind::UnconditionalStochastic, x2),
          make(3, SubmodelKind::Deterministic, p),
          make(4, SubmodelKind::Deterministic, q)};
}

double SyntheticModel::replicate(std::span<const SubmodelInstance> instances,
                                 const StateSnapshot*,
                                 RandomStream& stream) const {
  RandomStream s1 = stream.derive(0);
  RandomStream s2 = stream.derive(1);
  const double x1 = invoke(instances[0], nullptr, s1)[0];
  const double x2 = invoke(instances[1], nullptr, s2)[0];
  return eval_response(instances[2], x1, s1) + eval_response(instances[3], x2, s2);
}

SyntheticData generate_training(std::size_t m, RandomStream& stream,
                                const SyntheticTruth& truth) {
  SyntheticData data;
  data.per_submodel.resize(4);
  for (int l = 0; l < 4; ++l) data.per_submodel[static_cast<std::size_t>(l)].submodel_id = l + 1;
  RandomStream dummy = stream.derive(0);
  const auto insts = truth.true_instances();
  for (std::size_t i = 0; i < m; ++i) {
    const double x1 = stream.next_normal(truth.x1.mean, truth.x1.sd);
    const double x2 = stream.next_normal(truth.x2.mean, truth.x2.sd);
    const double px = eval_response(insts[2], x1, dummy);
    const double qx = eval_response(insts[3], x2, dummy);
    data.per_submodel[0].records.push_back({std::nullopt, {x1}});
    data.per_submodel[1].records.push_back({std::nullopt, {x2}});
    data.per_submodel[2].records.push_back({std::vector<double>{x1}, {px}});
    data.per_submodel[3].records.push_back({std::vector<double>{x2}, {qx}});
    data.y.push_back(px + qx);
  }
  return data;
}

std::vector<Fitter> synthetic_fitters(int knn_k) {
  std::vector<Fitter> fitters(4);
  fitters[0] = {.submodel_id = 1, .family = FitterFamily::NormalMLE};
  fitters[1] = {.submodel_id = 2, .family = FitterFamily::NormalMLE};
  fitters[2] = {.submodel_id = 3, .family = FitterFamily::KNNRegressor,
                .knn_k = knn_k};
  fitters[3] = {.submodel_id = 4, .family = FitterFamily::KNNRegressor,
                .knn_k = knn_k};
  return fitters;
}

std::vector<Fitter> surrogate_fitters() {
  std::vector<Fitter> fitters(4);
  fitters[0] = {.submodel_id = 1, .family = FitterFamily::NormalMLE};
  fitters[1] = {.submodel_id = 2, .family = FitterFamily::NormalMLE};
  fitters[2] = {.submodel_id = 3, .family = FitterFamily::PolyLS,
                .poly_degree = 1};
  fitters[3] = {.submodel_id = 4, .family = FitterFamily::KNNRegressor,
                .knn_k = 25};
  return fitters;
}

namespace {

/// One FullSU/InputOnly macro-replication: bootstrap instances, LH design,
/// designed experiment, quantile CI.
OutputTable designed_macro_rep(Scenario scenario, const SyntheticOptions& opt,
                               const SyntheticData& data, RandomStream& mstream) {
  ResamplePlan plan;
  plan.mode = ResampleMode::BootstrapPaired;
  plan.B = opt.B;
  plan.seed = mstream.root_seed();
  if (scenario == Scenario::InputOnly) {
    plan.mode_overrides[3] = ResampleMode::PointEstimate;
    plan.mode_overrides[4] = ResampleMode::PointEstimate;
  }
  const auto instances = sample_instances(plan, surrogate_fitters(),
                                          data.per_submodel, mstream.derive(1));
  const DesignMatrix design =
      stacked_design(opt.B, opt.S, 4, mstream.derive(2));
  SyntheticModel model;
  return run_experiment(model, instances, design, opt.n, nullptr,
                        mstream.derive(3));
}

}  // namespace

CoverageResult coverage_experiment(Scenario scenario,
                                   const SyntheticOptions& opt,
                                   RandomStream stream) {
  const SyntheticTruth truth;
  const double mu = truth.analytic_mean();
  const auto macro = static_cast<std::size_t>(opt.macro);

  std::vector<Interval> intervals(macro);
  parallel_for(macro, opt.threads, [&](std::size_t i) {
    RandomStream mstream = stream.derive(i);
    RandomStream data_stream = mstream.derive(0);
    const auto data = generate_training(static_cast<std::size_t>(opt.m),
                                        data_stream, truth);
    if (scenario == Scenario::NoEpistemic) {
      std::vector<SubmodelInstance> est(4);
      const auto fitters = surrogate_fitters();
      for (std::size_t l = 0; l < 4; ++l) est[l] = fit(fitters[l], data.per_submodel[l]);
      SyntheticModel model;
      const auto table =
          run_true_baseline(model, est, opt.n, mstream.derive(3));
      intervals[i] = naive_t_interval(table.outputs[0], opt.alpha);
    } else {
      const auto table = designed_macro_rep(scenario, opt, data, mstream);
      const auto ci = quantile_ci(table.config_means, opt.alpha);
      intervals[i] = {ci.lower, ci.upper};
    }
  });

  CoverageResult result;
  result.intervals = intervals;
  std::vector<double> widths;
  widths.reserve(macro);
  int covered = 0;
  for (const auto& ci : intervals) {
    widths.push_back(ci.width());
    if (ci.covers(mu)) ++covered;
  }
  result.coverage = static_cast<double>(covered) / static_cast<double>(macro);
  result.mean_width = mean(widths);
  result.width_se = std::sqrt(sample_variance(widths) / static_cast<double>(macro));
  return result;
}

ImportanceExperimentResult importance_experiment(const SyntheticOptions& opt,
                                                 RandomStream stream) {
  const SyntheticTruth truth;
  const auto macro = static_cast<std::size_t>(opt.macro);
  ImportanceExperimentResult result;
  result.single.resize(macro);
  result.bagged.resize(macro);

  // One fitted world shared by every macro-replication: training data,
  // bootstrap instances, and the stacked design are conditioned on.
  RandomStream world = stream.derive(0);
  RandomStream data_stream = world.derive(0);
  const auto data = generate_training(static_cast<std::size_t>(opt.m),
                                      data_stream, truth);
  ResamplePlan plan;
  plan.mode = ResampleMode::BootstrapPaired;
  plan.B = opt.B;
  plan.seed = world.root_seed();
  const auto instances = sample_instances(plan, surrogate_fitters(),
                                          data.per_submodel, world.derive(1));
  const DesignMatrix design = stacked_design(opt.B, opt.S, 4, world.derive(2));
  SyntheticModel model;

  parallel_for(macro, opt.threads, [&](std::size_t i) {
    RandomStream mstream = stream.derive(i + 1);
    const auto table = merge_duplicate_configs(run_experiment(
        model, instances, design, opt.n, nullptr, mstream.derive(0)));
    result.single[i] = bagged_importance(table, 1, BagWeighting::Uniform,
                                         mstream.derive(1));
    result.bagged[i] = bagged_importance(table, opt.bag_trees,
                                         BagWeighting::Uniform, mstream.derive(2));
  });
  return result;
}

VrfResult vrf_experiment(const SyntheticOptions& opt, RandomStream stream) {
  const auto reports = importance_experiment(opt, stream);
  VrfResult result;
  for (std::size_t i = 0; i < reports.single.size(); ++i) {
    result.single_scores.push_back(reports.single[i].per_submodel);
    result.bagged_scores.push_back(reports.bagged[i].per_submodel);
  }
  result.factors = vrf(result.single_scores, result.bagged_scores);
  return result;
}

FactorialStudyResult synthetic_factorial(const FactorialOptions& options, int m,
                                         RandomStream stream) {
  const SyntheticTruth truth;
  SyntheticModel model;
  DatasetGenerator gen = [m, truth](RandomStream& s) {
    return generate_training(static_cast<std::size_t>(m), s, truth).per_submodel;
  };
  return factorial_study(model, truth.true_instances(), synthetic_fitters(), gen,
                         truth.analytic_mean(), options, stream);
}

}  // namespace subq
