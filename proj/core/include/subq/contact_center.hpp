#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>

#include "subq/fitters.hpp"
#include "subq/harness.hpp"
#include "subq/resample.hpp"
#include "subq/stats.hpp"
#include "subq/twin.hpp"

namespace subq {

/// Contact-center simulation parameters. All times are minutes unless a name
/// says otherwise; arrival rates are contacts/hour, looked up cyclically by
/// hour index. Two contact classes; three expert groups of
/// `experts_per_group` experts each: group 1 serves class 1 only, group 2
/// serves class 2 only, group 3 serves both with class-1 priority.
struct CenterConfig {
  double horizon_hours = 9.0;
  double epoch_minutes = 30.0;
  int experts_per_group = 2;
  std::array<std::vector<double>, 2> hourly_rates{
      std::vector<double>{20, 25, 30, 35, 40, 35, 30, 25, 20},
      std::vector<double>{15, 20, 28, 36, 42, 36, 28, 20, 15}};
  // patience (first) and handle (second) marginals, Gaussian-copula coupled
  std::array<CopulaParams, 2> patience_handle{
      CopulaParams{{2.0, 2.0 / 6.0}, {3.0, 3.0 / 8.0}, 0.4},
      CopulaParams{{2.0, 2.0 / 5.0}, {3.0, 3.0 / 10.0}, 0.4}};

  int epochs() const {
    return static_cast<int>(horizon_hours * 60.0 / epoch_minutes + 0.5);
  }
  int expert_count() const { return 3 * experts_per_group; }

  std::string to_json() const;
  static CenterConfig from_json(const std::string& text);
};

// Submodel slots (L = 6):
//   1: class-1 arrivals   2: class-2 arrivals
//   3: class-1 patience/handle   4: class-2 patience/handle
//   5: contact-triggered routing   6: expert-triggered routing
inline constexpr int kCenterSubmodels = 6;

// routing feature layout: [q1, q2, idle1, idle2, idle3, wait1, wait2,
// hour one-hot (9)]; the contact-triggered vector appends the contact class.
inline constexpr int kRoutingHours = 9;
inline constexpr int kExpertFeatureCount = 7 + kRoutingHours;
inline constexpr int kContactFeatureCount = kExpertFeatureCount + 1;

/// Hot-startable DES state; times are absolute minutes since day start.
struct CenterState {
  struct Queued {
    int cls = 0;  // 0 or 1
    double arrival_time = 0.0;
    double patience = 0.0;
    double handle = 0.0;
    std::int64_t id = 0;
  };
  struct InService {
    int cls = 0;
    double completion_time = 0.0;
    std::int64_t id = 0;
  };

  double clock = 0.0;
  std::array<std::deque<Queued>, 2> queues;
  std::vector<std::optional<InService>> experts;  // nullopt = idle
  std::vector<double> idle_since;
  std::int64_t next_id = 0;

  static CenterState empty(const CenterConfig& config);
  std::string to_json() const;
  static CenterState from_json(const std::string& text);
};

struct RoutingRecord {
  RoutingTrigger trigger;
  std::vector<double> features;
  int action = 0;
};

struct EpochLogs {
  std::array<std::vector<double>, 2> arrival_times_hours;
  std::array<std::vector<std::pair<double, double>>, 2> patience_handle_pairs;
  std::vector<RoutingRecord> routing;
  std::vector<double> class2_terminated_waits;
  std::int64_t arrived = 0, served = 0, abandoned = 0;

  void append(const EpochLogs& other);
};

struct EpochResult {
  double kpi = 0.0;  // mean class-2 wait terminated within the epoch, 0 if none
  CenterState end_state;
  EpochLogs logs;
};

/// Run one epoch of the event-driven simulation from `start`.
/// `start.clock` must sit on an epoch boundary.
EpochResult simulate_epoch(const CenterConfig& config,
                           std::span<const SubmodelInstance> instances,
                           const CenterState& start, RandomStream& stream);

/// The reference routing instances plus true arrival/copula parameters.
std::vector<SubmodelInstance> center_true_instances(const CenterConfig& config);

/// Fitters for the six submodel slots; `bayesian` selects LogisticLaplace for
/// the routing surrogates.
std::vector<Fitter> center_fitters(const CenterConfig& config, bool bayesian);

/// Build the per-submodel training datasets from one simulated day of logs.
std::vector<TrainingDataset> collect_training(const EpochLogs& day_logs,
                                              const CenterConfig& config);

/// Simulate a full day with the given instances, chaining epochs; returns the
/// per-epoch snapshots (observed_kpi = the realized epoch KPI) and pooled logs.
struct DayResult {
  std::vector<StateSnapshot> snapshots;  // state at the start of each epoch
  std::vector<double> epoch_kpis;
  EpochLogs logs;
  CenterState final_state;
};
DayResult simulate_day(const CenterConfig& config,
                       std::span<const SubmodelInstance> instances,
                       RandomStream root, const CenterState* start = nullptr,
                       int epochs_override = -1);

/// SimulationModel adapter: one replication = one epoch hot-started from the
/// snapshot's CenterState payload.
class ContactCenterModel : public SimulationModel {
 public:
  explicit ContactCenterModel(CenterConfig config) : config_(std::move(config)) {}
  int submodel_count() const override { return kCenterSubmodels; }
  std::string kpi_name() const override { return "class2_mean_wait"; }
  double replicate(std::span<const SubmodelInstance> instances,
                   const StateSnapshot* state,
                   RandomStream& stream) const override;
  const CenterConfig& config() const { return config_; }

 private:
  CenterConfig config_;
};

// ---- full digital-twin workflow ---------------------------------------------

enum class TwinMode { Frequentist, Bayesian };

struct TwinOptions {
  int B = 5;
  int S = 2;
  int n = 100;
  int bag_trees = 40;
  int truth_replications = 1000;
  int nosu_replications = 100;
  double alpha = 0.1;
  int threads = 1;
};

struct EpochSummary {
  int epoch = 0;
  double truth_mean = 0.0;
  double truth_se = 0.0;
  double observed = 0.0;
  Interval nosu_ci;     // naive t-interval, no submodel uncertainty
  QuantileCI su_ci;     // quantile CI over the B' configuration means
};

struct TwinResult {
  TwinMode mode = TwinMode::Frequentist;
  std::vector<EpochSummary> epochs;
  std::vector<OutputTable> su_tables;
  std::vector<ImportanceReport> per_state_importance;
  ImportanceReport aggregate_uniform;
  ImportanceReport aggregate_tss_weighted;
  StateAverageBias bias;
};

TwinResult run_twin_experiment(TwinMode mode, const CenterConfig& config,
                               const TwinOptions& options, RandomStream root);

/// Display names for the six submodel slots (importance reports, figures).
const std::array<std::string, kCenterSubmodels>& center_submodel_names();

}  // namespace subq
