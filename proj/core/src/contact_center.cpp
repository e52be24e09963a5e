#include "subq/contact_center.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <json.hpp>

namespace subq {

namespace {

using json = nlohmann::json;

enum EventType : int { kCompletion = 0, kAbandonment = 1, kArrival = 2 };

struct Event {
  double time;
  int type;  // simultaneous events resolve completion < abandonment < arrival
  std::int64_t seq;
  std::int64_t contact_id;
  int expert = -1;
  CenterState::Queued contact;  // payload for arrivals
};

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.type != b.type) return a.type > b.type;
    return a.seq > b.seq;
  }
};

int expert_group(const CenterConfig& cfg, int expert) {
  return expert / cfg.experts_per_group;
}

bool group_serves(int group, int cls) { return group == cls || group == 2; }

double rate_per_hour(const SubmodelInstance& inst, int hour,
                     RandomStream& stream) {
  const std::vector<double> in{static_cast<double>(hour)};
  return invoke(inst, &in, stream)[0];
}

/// NHPP arrivals on [t0, t1) by thinning against the max hourly rate.
std::vector<double> generate_arrivals(const SubmodelInstance& inst, double t0,
                                      double t1, RandomStream& stream) {
  const auto* rates = std::get_if<PiecewiseRateParams>(&inst.params);
  if (rates == nullptr || rates->rates.empty())
    throw SubqError("arrival submodel must carry piecewise rates");
  const double max_rate =
      *std::max_element(rates->rates.begin(), rates->rates.end()) / 60.0;
  std::vector<double> times;
  if (max_rate <= 0.0) return times;
  double t = t0;
  for (;;) {
    t += stream.next_exponential(max_rate);
    if (t >= t1) break;
    const int hour = static_cast<int>(t / 60.0);
    const double rate = rate_per_hour(inst, hour, stream) / 60.0;
    if (stream.next_uniform() < rate / max_rate) times.push_back(t);
  }
  return times;
}

std::vector<double> routing_features(const CenterConfig& cfg,
                                     const CenterState& st, double now,
                                     RoutingTrigger trigger, int cls) {
  std::vector<double> f;
  f.reserve(trigger == RoutingTrigger::ContactTriggered ? kContactFeatureCount
                                                        : kExpertFeatureCount);
  f.push_back(static_cast<double>(st.queues[0].size()));
  f.push_back(static_cast<double>(st.queues[1].size()));
  for (int g = 0; g < 3; ++g) {
    int idle = 0;
    for (int e = g * cfg.experts_per_group; e < (g + 1) * cfg.experts_per_group; ++e)
      if (!st.experts[static_cast<std::size_t>(e)]) ++idle;
    f.push_back(static_cast<double>(idle));
  }
  for (int c = 0; c < 2; ++c)
    f.push_back(st.queues[static_cast<std::size_t>(c)].empty()
                    ? 0.0
                    : now - st.queues[static_cast<std::size_t>(c)].front().arrival_time);
  const int hour = static_cast<int>(now / 60.0) % kRoutingHours;
  for (int h = 0; h < kRoutingHours; ++h) f.push_back(h == hour ? 1.0 : 0.0);
  if (trigger == RoutingTrigger::ContactTriggered)
    f.push_back(static_cast<double>(cls));
  return f;
}

/// Mask infeasible actions and renormalize; uniform over feasible if the
/// submodel places zero mass on every feasible action.
std::vector<double> mask_probs(std::vector<double> probs,
                               const std::vector<bool>& feasible) {
  double total = 0.0;
  int feasible_count = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (!feasible[a]) probs[a] = 0.0;
    total += probs[a];
    if (feasible[a]) ++feasible_count;
  }
  if (feasible_count == 0)
    throw NoFeasibleAction("routing: no feasible action");
  if (total <= 0.0) {
    for (std::size_t a = 0; a < probs.size(); ++a)
      probs[a] = feasible[a] ? 1.0 / feasible_count : 0.0;
  } else {
    for (double& p : probs) p /= total;
  }
  return probs;
}

class EpochSimulator {
 public:
  EpochSimulator(const CenterConfig& cfg,
                 std::span<const SubmodelInstance> instances,
                 const CenterState& start, RandomStream& stream)
      : cfg_(cfg),
        instances_(instances),
        st_(start),
        copula_streams_{stream.derive(2), stream.derive(3)},
        routing_stream_(stream.derive(4)),
        t0_(start.clock),
        t1_(start.clock + cfg.epoch_minutes) {
    if (instances.size() != kCenterSubmodels)
      throw SubqError("simulate_epoch: expected 6 submodel instances");
    validate(start);
    RandomStream arrivals0 = stream.derive(0);
    RandomStream arrivals1 = stream.derive(1);
    seed_events(arrivals0, arrivals1);
  }

  EpochResult run() {
    while (!events_.empty()) {
      Event ev = events_.top();
      events_.pop();
      if (ev.time >= t1_) break;
      st_.clock = ev.time;
      switch (ev.type) {
        case kArrival: on_arrival(ev); break;
        case kCompletion: on_completion(ev); break;
        case kAbandonment: on_abandonment(ev); break;
      }
    }
    st_.clock = t1_;

    EpochResult result;
    result.kpi = logs_.class2_terminated_waits.empty()
                     ? 0.0
                     : mean(logs_.class2_terminated_waits);
    result.end_state = std::move(st_);
    result.logs = std::move(logs_);
    return result;
  }

 private:
  void validate(const CenterState& start) {
    const double rem = std::fmod(start.clock, cfg_.epoch_minutes);
    if (std::min(rem, cfg_.epoch_minutes - rem) > 1e-9)
      throw InvalidSnapshot("state clock is not on an epoch boundary");
    if (static_cast<int>(start.experts.size()) != cfg_.expert_count())
      throw InvalidSnapshot("state expert vector does not match the config");
    for (const auto& item : start.experts)
      if (item && item->completion_time < start.clock - 1e-9)
        throw InvalidSnapshot("in-service completion time is in the past");
  }

  void seed_events(RandomStream& arrivals0, RandomStream& arrivals1) {
    // pending completions and abandonments carried in from the snapshot
    for (std::size_t e = 0; e < st_.experts.size(); ++e)
      if (st_.experts[e])
        push_event({st_.experts[e]->completion_time, kCompletion, next_seq_++,
                    st_.experts[e]->id, static_cast<int>(e), {}});
    for (const auto& queue : st_.queues)
      for (const auto& c : queue)
        push_event({c.arrival_time + c.patience, kAbandonment, next_seq_++,
                    c.id, -1, {}});

    // pre-generated NHPP arrivals with their patience/handle draws
    std::array<std::vector<double>, 2> times{
        generate_arrivals(instances_[0], t0_, t1_, arrivals0),
        generate_arrivals(instances_[1], t0_, t1_, arrivals1)};
    std::vector<std::pair<double, int>> merged;
    for (int cls = 0; cls < 2; ++cls)
      for (double t : times[static_cast<std::size_t>(cls)])
        merged.emplace_back(t, cls);
    std::sort(merged.begin(), merged.end());
    for (const auto& [t, cls] : merged) {
      const auto pair =
          invoke(instances_[static_cast<std::size_t>(2 + cls)], nullptr,
                 copula_streams_[static_cast<std::size_t>(cls)]);
      CenterState::Queued contact{cls, t, pair[0], pair[1], st_.next_id++};
      push_event({t, kArrival, next_seq_++, contact.id, -1, contact});
    }
  }

  void push_event(Event ev) { events_.push(std::move(ev)); }

  int pick_expert_in_group(int group) const {
    int best = -1;
    for (int e = group * cfg_.experts_per_group;
         e < (group + 1) * cfg_.experts_per_group; ++e) {
      if (st_.experts[static_cast<std::size_t>(e)]) continue;
      if (best < 0 || st_.idle_since[static_cast<std::size_t>(e)] <
                          st_.idle_since[static_cast<std::size_t>(best)])
        best = e;  // longest idle; ties to the lowest index
    }
    return best;
  }

  void start_service(int expert, const CenterState::Queued& contact, double now) {
    st_.experts[static_cast<std::size_t>(expert)] =
        CenterState::InService{contact.cls, now + contact.handle, contact.id};
    push_event({now + contact.handle, kCompletion, next_seq_++, contact.id,
                expert, {}});
    record_wait_termination(contact, now - contact.arrival_time, now);
  }

  void record_wait_termination(const CenterState::Queued& contact, double wait,
                               double now) {
    if (contact.cls == 1 && now > t0_ - 1e-12 && now <= t1_)
      logs_.class2_terminated_waits.push_back(wait);
  }

  void on_arrival(const Event& ev) {
    const auto& contact = ev.contact;
    ++logs_.arrived;
    logs_.arrival_times_hours[static_cast<std::size_t>(contact.cls)].push_back(
        ev.time / 60.0);
    logs_.patience_handle_pairs[static_cast<std::size_t>(contact.cls)]
        .emplace_back(contact.patience, contact.handle);

    std::vector<bool> feasible(3, false);
    bool any = false;
    if (st_.queues[static_cast<std::size_t>(contact.cls)].empty()) {
      for (int g = 0; g < 3; ++g)
        if (group_serves(g, contact.cls) && pick_expert_in_group(g) >= 0) {
          feasible[static_cast<std::size_t>(g)] = true;
          any = true;
        }
    }
    if (!any) {
      st_.queues[static_cast<std::size_t>(contact.cls)].push_back(contact);
      push_event({contact.arrival_time + contact.patience, kAbandonment,
                  next_seq_++, contact.id, -1, {}});
      return;
    }

    const auto features = routing_features(cfg_, st_, ev.time,
                                           RoutingTrigger::ContactTriggered,
                                           contact.cls);
    auto probs = mask_probs(invoke(instances_[4], &features, routing_stream_),
                            feasible);
    const int group = routing_stream_.next_categorical(probs);
    logs_.routing.push_back({RoutingTrigger::ContactTriggered, features, group});
    start_service(pick_expert_in_group(group), contact, ev.time);
  }

  void on_completion(const Event& ev) {
    const auto e = static_cast<std::size_t>(ev.expert);
    if (!st_.experts[e] || st_.experts[e]->id != ev.contact_id)
      return;  // stale event (should not happen; completions are never cancelled)
    st_.experts[e].reset();
    st_.idle_since[e] = ev.time;
    ++logs_.served;

    const int group = expert_group(cfg_, ev.expert);
    std::vector<bool> feasible(2, false);
    bool any = false;
    for (int cls = 0; cls < 2; ++cls)
      if (group_serves(group, cls) &&
          !st_.queues[static_cast<std::size_t>(cls)].empty()) {
        feasible[static_cast<std::size_t>(cls)] = true;
        any = true;
      }
    if (!any) return;

    const auto features = routing_features(cfg_, st_, ev.time,
                                           RoutingTrigger::ExpertTriggered, -1);
    auto probs = mask_probs(invoke(instances_[5], &features, routing_stream_),
                            feasible);
    const int cls = routing_stream_.next_categorical(probs);
    logs_.routing.push_back({RoutingTrigger::ExpertTriggered, features, cls});

    auto contact = st_.queues[static_cast<std::size_t>(cls)].front();
    st_.queues[static_cast<std::size_t>(cls)].pop_front();
    start_service(ev.expert, contact, ev.time);
  }

  void on_abandonment(const Event& ev) {
    auto& queue = st_.queues[0].empty() ||
                          std::none_of(st_.queues[0].begin(), st_.queues[0].end(),
                                       [&](const auto& c) { return c.id == ev.contact_id; })
                      ? st_.queues[1]
                      : st_.queues[0];
    auto it = std::find_if(queue.begin(), queue.end(),
                           [&](const auto& c) { return c.id == ev.contact_id; });
    if (it == queue.end()) return;  // already served
    const auto contact = *it;
    queue.erase(it);
    ++logs_.abandoned;
    record_wait_termination(contact, contact.patience, ev.time);
  }

  const CenterConfig& cfg_;
  std::span<const SubmodelInstance> instances_;
  CenterState st_;
  std::array<RandomStream, 2> copula_streams_;
  RandomStream routing_stream_;
  double t0_, t1_;
  std::int64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventOrder> events_;
  EpochLogs logs_;
};

}  // namespace

CenterState CenterState::empty(const CenterConfig& config) {
  CenterState st;
  st.experts.assign(static_cast<std::size_t>(config.expert_count()), std::nullopt);
  st.idle_since.assign(static_cast<std::size_t>(config.expert_count()), 0.0);
  return st;
}

void EpochLogs::append(const EpochLogs& other) {
  for (int c = 0; c < 2; ++c) {
    auto& at = arrival_times_hours[static_cast<std::size_t>(c)];
    const auto& ot = other.arrival_times_hours[static_cast<std::size_t>(c)];
    at.insert(at.end(), ot.begin(), ot.end());
    auto& ph = patience_handle_pairs[static_cast<std::size_t>(c)];
    const auto& op = other.patience_handle_pairs[static_cast<std::size_t>(c)];
    ph.insert(ph.end(), op.begin(), op.end());
  }
  routing.insert(routing.end(), other.routing.begin(), other.routing.end());
  class2_terminated_waits.insert(class2_terminated_waits.end(),
                                 other.class2_terminated_waits.begin(),
                                 other.class2_terminated_waits.end());
  arrived += other.arrived;
  served += other.served;
  abandoned += other.abandoned;
}

EpochResult simulate_epoch(const CenterConfig& config,
                           std::span<const SubmodelInstance> instances,
                           const CenterState& start, RandomStream& stream) {
  return EpochSimulator(config, instances, start, stream).run();
}

std::vector<SubmodelInstance> center_true_instances(const CenterConfig& config) {
  auto make = [](int id, SubmodelKind kind, SubmodelParams params) {
    SubmodelInstance inst;
    inst.submodel_id = id;
    inst.instance_id = 1;
    inst.kind = kind;
    inst.provenance = {ProvenanceTag::True, 0};
    inst.params = std::move(params);
    return inst;
  };
  return {
      make(1, SubmodelKind::Deterministic, PiecewiseRateParams{config.hourly_rates[0]}),
      make(2, SubmodelKind::Deterministic, PiecewiseRateParams{config.hourly_rates[1]}),
      make(3, SubmodelKind::UnconditionalStochastic, config.patience_handle[0]),
      make(4, SubmodelKind::UnconditionalStochastic, config.patience_handle[1]),
      make(5, SubmodelKind::Deterministic,
           TrueRoutingParams{RoutingTrigger::ContactTriggered}),
      make(6, SubmodelKind::Deterministic,
           TrueRoutingParams{RoutingTrigger::ExpertTriggered}),
  };
}

std::vector<Fitter> center_fitters(const CenterConfig& config, bool bayesian) {
  const int periods = static_cast<int>(config.hourly_rates[0].size());
  std::vector<Fitter> fitters(kCenterSubmodels);
  for (int c = 0; c < 2; ++c) {
    fitters[static_cast<std::size_t>(c)] = {
        .submodel_id = c + 1,
        .family = FitterFamily::PiecewiseRateMLE,
        .periods = periods,
        .exposure_per_period = 1.0,  // one observed day, hours as period units
    };
    fitters[static_cast<std::size_t>(2 + c)] = {
        .submodel_id = 3 + c, .family = FitterFamily::GaussianCopula};
  }
  const auto routing_family =
      bayesian ? FitterFamily::LogisticLaplace : FitterFamily::LogisticMLE;
  fitters[4] = {.submodel_id = 5,
                .family = routing_family,
                .logistic_classes = 3,
                .logistic_features = kContactFeatureCount};
  fitters[5] = {.submodel_id = 6,
                .family = routing_family,
                .logistic_classes = 2,
                .logistic_features = kExpertFeatureCount};
  return fitters;
}

std::vector<TrainingDataset> collect_training(const EpochLogs& day_logs,
                                              const CenterConfig& config) {
  (void)config;
  std::vector<TrainingDataset> data(kCenterSubmodels);
  for (int l = 0; l < kCenterSubmodels; ++l)
    data[static_cast<std::size_t>(l)].submodel_id = l + 1;
  for (int c = 0; c < 2; ++c) {
    for (double t : day_logs.arrival_times_hours[static_cast<std::size_t>(c)])
      data[static_cast<std::size_t>(c)].records.push_back({std::nullopt, {t}});
    for (const auto& [patience, handle] :
         day_logs.patience_handle_pairs[static_cast<std::size_t>(c)])
      data[static_cast<std::size_t>(2 + c)].records.push_back(
          {std::nullopt, {patience, handle}});
  }
  for (const auto& rec : day_logs.routing) {
    const std::size_t slot =
        rec.trigger == RoutingTrigger::ContactTriggered ? 4 : 5;
    data[slot].records.push_back(
        {rec.features, {static_cast<double>(rec.action)}});
  }
  return data;
}

DayResult simulate_day(const CenterConfig& config,
                       std::span<const SubmodelInstance> instances,
                       RandomStream root, const CenterState* start,
                       int epochs_override) {
  DayResult day;
  CenterState state = start ? *start : CenterState::empty(config);
  const int epochs = epochs_override > 0 ? epochs_override : config.epochs();
  for (int e = 0; e < epochs; ++e) {
    day.snapshots.push_back(
        {e, state.clock, std::any{state}, std::nullopt});
    RandomStream epoch_stream = root.derive(static_cast<std::uint64_t>(e));
    auto result = simulate_epoch(config, instances, state, epoch_stream);
    day.snapshots.back().observed_kpi = result.kpi;
    day.epoch_kpis.push_back(result.kpi);
    day.logs.append(result.logs);
    state = std::move(result.end_state);
  }
  day.final_state = std::move(state);
  return day;
}

double ContactCenterModel::replicate(std::span<const SubmodelInstance> instances,
                                     const StateSnapshot* state,
                                     RandomStream& stream) const {
  const CenterState* start = nullptr;
  CenterState empty;
  if (state) {
    start = std::any_cast<CenterState>(&state->payload);
    if (start == nullptr)
      throw InvalidSnapshot("snapshot payload is not a CenterState");
  } else {
    empty = CenterState::empty(config_);
    start = &empty;
  }
  return simulate_epoch(config_, instances, *start, stream).kpi;
}

const std::array<std::string, kCenterSubmodels>& center_submodel_names() {
  static const std::array<std::string, kCenterSubmodels> names = {
      "arrivals_class1",  "arrivals_class2", "patience_handle_class1",
      "patience_handle_class2", "routing_contact", "routing_expert"};
  return names;
}

// ---- JSON serialization -----------------------------------------------------

namespace {

json gamma_to_json(const GammaParams& g) {
  return json{{"shape", g.shape}, {"rate", g.rate}};
}

GammaParams gamma_from_json(const json& j) {
  return {j.at("shape").get<double>(), j.at("rate").get<double>()};
}

json copula_to_json(const CopulaParams& c) {
  return json{{"patience", gamma_to_json(c.first)},
              {"handle", gamma_to_json(c.second)},
              {"rho", c.rho}};
}

CopulaParams copula_from_json(const json& j) {
  return {gamma_from_json(j.at("patience")), gamma_from_json(j.at("handle")),
          j.at("rho").get<double>()};
}

}  // namespace

std::string CenterConfig::to_json() const {
  json j{{"horizon_hours", horizon_hours},
         {"epoch_minutes", epoch_minutes},
         {"experts_per_group", experts_per_group},
         {"hourly_rates_class1", hourly_rates[0]},
         {"hourly_rates_class2", hourly_rates[1]},
         {"patience_handle_class1", copula_to_json(patience_handle[0])},
         {"patience_handle_class2", copula_to_json(patience_handle[1])}};
  return j.dump(2);
}

CenterConfig CenterConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  CenterConfig c;
  c.horizon_hours = j.value("horizon_hours", c.horizon_hours);
  c.epoch_minutes = j.value("epoch_minutes", c.epoch_minutes);
  c.experts_per_group = j.value("experts_per_group", c.experts_per_group);
  if (j.contains("hourly_rates_class1"))
    c.hourly_rates[0] = j.at("hourly_rates_class1").get<std::vector<double>>();
  if (j.contains("hourly_rates_class2"))
    c.hourly_rates[1] = j.at("hourly_rates_class2").get<std::vector<double>>();
  if (j.contains("patience_handle_class1"))
    c.patience_handle[0] = copula_from_json(j.at("patience_handle_class1"));
  if (j.contains("patience_handle_class2"))
    c.patience_handle[1] = copula_from_json(j.at("patience_handle_class2"));
  return c;
}

std::string CenterState::to_json() const {
  json j;
  j["clock"] = clock;
  j["next_id"] = next_id;
  for (int c = 0; c < 2; ++c) {
    json q = json::array();
    for (const auto& item : queues[static_cast<std::size_t>(c)])
      q.push_back({{"cls", item.cls},
                   {"arrival_time", item.arrival_time},
                   {"patience", item.patience},
                   {"handle", item.handle},
                   {"id", item.id}});
    j[c == 0 ? "queue_class1" : "queue_class2"] = std::move(q);
  }
  json experts_json = json::array();
  for (std::size_t e = 0; e < experts.size(); ++e) {
    json item;
    item["idle_since"] = idle_since[e];
    if (experts[e]) {
      item["cls"] = experts[e]->cls;
      item["completion_time"] = experts[e]->completion_time;
      item["id"] = experts[e]->id;
    }
    experts_json.push_back(std::move(item));
  }
  j["experts"] = std::move(experts_json);
  return j.dump(2);
}

CenterState CenterState::from_json(const std::string& text) {
  const json j = json::parse(text);
  CenterState st;
  st.clock = j.at("clock").get<double>();
  st.next_id = j.at("next_id").get<std::int64_t>();
  for (int c = 0; c < 2; ++c) {
    for (const auto& item : j.at(c == 0 ? "queue_class1" : "queue_class2"))
      st.queues[static_cast<std::size_t>(c)].push_back(
          {item.at("cls").get<int>(), item.at("arrival_time").get<double>(),
           item.at("patience").get<double>(), item.at("handle").get<double>(),
           item.at("id").get<std::int64_t>()});
  }
  for (const auto& item : j.at("experts")) {
    st.idle_since.push_back(item.at("idle_since").get<double>());
    if (item.contains("cls"))
      st.experts.push_back(CenterState::InService{
          item.at("cls").get<int>(), item.at("completion_time").get<double>(),
          item.at("id").get<std::int64_t>()});
    else
      st.experts.push_back(std::nullopt);
  }
  return st;
}

}  // namespace subq
