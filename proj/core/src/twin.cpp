#include "subq/twin.hpp"

#include "subq/design.hpp"

namespace subq {

std::vector<OutputTable> per_state_experiment(
    const SimulationModel& model,
    const std::vector<std::vector<SubmodelInstance>>& instances,
    const std::vector<StateSnapshot>& states, int B, int S, int n,
    RandomStream root, const HarnessOptions& options) {
  std::vector<OutputTable> tables;
  tables.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    RandomStream branch = root.derive(i);
    RandomStream design_stream = branch.derive(0);
    // rows are kept un-merged so configuration b' pairs up across states;
    // analysis merges duplicates before growing trees
    const DesignMatrix design =
        stacked_design(B, S, model.submodel_count(), design_stream);
    tables.push_back(run_experiment(model, instances, design, n, &states[i],
                                    branch.derive(1), options));
  }
  return tables;
}

ImportanceReport aggregate_importance(const std::vector<ImportanceReport>& reports,
                                      StateWeighting weighting) {
  if (reports.empty()) throw SubqError("aggregate_importance: no reports");
  const std::size_t L = reports.front().per_submodel.size();
  for (const auto& r : reports)
    if (r.per_submodel.size() != L)
      throw SubqError("aggregate_importance: reports disagree on L");

  ImportanceReport agg;
  agg.per_submodel.assign(L, 0.0);
  agg.split_counts.assign(L, 0);
  agg.kind = reports.front().kind;
  agg.bag_trees = reports.front().bag_trees;
  agg.bag_weighting = reports.front().bag_weighting;

  double wtotal = 0.0;
  for (const auto& r : reports) {
    const double w = weighting == StateWeighting::AvgTssWeighted ? r.tss : 1.0;
    wtotal += w;
    for (std::size_t l = 0; l < L; ++l) {
      agg.per_submodel[l] += w * r.per_submodel[l];
      agg.split_counts[l] += r.split_counts[l];
    }
    agg.aleatoric += w * r.aleatoric;
    agg.tss += r.tss;
    agg.rss += r.rss;
  }
  for (std::size_t l = 0; l < L; ++l) agg.per_submodel[l] /= wtotal;
  agg.aleatoric /= wtotal;
  agg.tss /= static_cast<double>(reports.size());
  agg.rss /= static_cast<double>(reports.size());
  return agg;
}

StateAverageBias state_average_bias(const std::vector<OutputTable>& tables,
                                    const std::vector<double>& observed,
                                    double alpha) {
  if (tables.empty()) throw SubqError("state_average_bias: no tables");
  if (observed.size() != tables.size())
    throw MissingObservation("state_average_bias: one observed KPI per state");
  const std::size_t Bp = tables.front().config_means.size();
  for (const auto& t : tables)
    if (t.config_means.size() != Bp)
      throw SubqError("state_average_bias: states must share B'");

  StateAverageBias out;
  out.state_count = static_cast<int>(tables.size());
  out.estimates.assign(Bp, 0.0);
  for (std::size_t i = 0; i < tables.size(); ++i)
    for (std::size_t b = 0; b < Bp; ++b)
      out.estimates[b] += tables[i].config_means[b] - observed[i];
  for (double& e : out.estimates) e /= static_cast<double>(tables.size());
  out.ci = quantile_ci(out.estimates, alpha);
  return out;
}

}  // namespace subq
