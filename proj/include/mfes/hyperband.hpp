#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfes/acquisition.hpp"
#include "mfes/config_space.hpp"
#include "mfes/ensemble.hpp"
#include "mfes/errors.hpp"
#include "mfes/evaluator.hpp"
#include "mfes/random.hpp"

namespace mfes {

enum class BudgetType { Seconds, ResourceUnits };

struct HBParams {
  double max_resource = 0.0;  // R
  double eta = 3.0;           // discard proportion
  double total_budget = 0.0;  // B_hpo
  BudgetType budget_type = BudgetType::Seconds;

  void validate() const {
    if (!(eta > 1.0)) throw ConfigError("eta must be greater than 1");
    if (max_resource < eta) {
      throw ConfigError("max_resource must be at least eta");
    }
    if (!(total_budget > 0.0)) throw ConfigError("total_budget must be positive");
  }
};

/// Largest s with eta^s <= R (within rounding slack).
inline int max_bracket_index(double max_resource, double eta) {
  int s = 0;
  double power = 1.0;
  while (power * eta <= max_resource * (1.0 + 1e-9)) {
    power *= eta;
    ++s;
  }
  return s;
}

/// Canonical resource level R * eta^-e. Every rung and fidelity group is
/// keyed by this value so levels from different brackets compare equal.
inline double resource_level(double max_resource, double eta, int exponent) {
  return max_resource * std::pow(eta, -static_cast<double>(exponent));
}

struct Rung {
  int n = 0;         // configurations evaluated at this rung
  double resource = 0.0;
};

/// One successive-halving execution: n1 configurations starting at r1,
/// thinned by eta per rung until the full resource R.
struct BracketPlan {
  int s = 0;
  int n1 = 0;
  double r1 = 0.0;
  std::vector<Rung> rungs;
};

namespace detail {

inline int ceil_with_slack(double value) {
  double nearest = std::round(value);
  if (std::abs(value - nearest) < 1e-6) return static_cast<int>(nearest);
  return static_cast<int>(std::ceil(value));
}

}  // namespace detail

inline BracketPlan make_bracket_plan(const HBParams& params, int s) {
  int s_max = max_bracket_index(params.max_resource, params.eta);
  double budget_ratio = static_cast<double>(s_max + 1);  // B / R
  BracketPlan plan;
  plan.s = s;
  plan.n1 = detail::ceil_with_slack(budget_ratio * std::pow(params.eta, s) /
                                    static_cast<double>(s + 1));
  plan.r1 = resource_level(params.max_resource, params.eta, s);
  int n = plan.n1;
  for (int i = 0; i <= s; ++i) {
    plan.rungs.push_back({n, resource_level(params.max_resource, params.eta, s - i)});
    n = std::max(1, static_cast<int>(std::floor(static_cast<double>(n) / params.eta)));
  }
  return plan;
}

/// Hyperband outer loop: the bracket grid from s_max down to 0.
inline std::vector<BracketPlan> bracket_schedule(const HBParams& params) {
  params.validate();
  int s_max = max_bracket_index(params.max_resource, params.eta);
  std::vector<BracketPlan> plans;
  plans.reserve(static_cast<std::size_t>(s_max) + 1);
  for (int s = s_max; s >= 0; --s) plans.push_back(make_bracket_plan(params, s));
  return plans;
}

/// Fidelity-grouped measurement store, pre-keyed with all K canonical
/// resource levels in ascending order (group K is the high-fidelity one).
class MeasurementStore {
 public:
  MeasurementStore(double max_resource, double eta) {
    int s_max = max_bracket_index(max_resource, eta);
    groups_.reserve(static_cast<std::size_t>(s_max) + 1);
    for (int e = s_max; e >= 0; --e) {
      groups_.emplace_back(resource_level(max_resource, eta, e));
    }
  }

  std::size_t fidelity_count() const { return groups_.size(); }  // K
  const std::vector<FidelityGroup>& groups() const { return groups_; }

  std::vector<const FidelityGroup*> group_pointers() const {
    std::vector<const FidelityGroup*> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) out.push_back(&g);
    return out;
  }

  const FidelityGroup& top_group() const { return groups_.back(); }

  FidelityGroup& group_at(double level) {
    for (auto& g : groups_) {
      if (g.resource_level() == level) return g;
    }
    throw DomainError("resource level is not one of the rung levels");
  }

  void add(Configuration config, double level, double loss) {
    group_at(level).add(std::move(config), loss);
  }

  /// Highest non-empty group, if any measurement exists at all.
  const FidelityGroup* highest_non_empty() const {
    for (auto it = groups_.rbegin(); it != groups_.rend(); ++it) {
      if (!it->empty()) return &*it;
    }
    return nullptr;
  }

  /// Incumbent for the sampler: minimum standardized loss of the highest
  /// non-empty group, under that group's own statistics.
  std::optional<double> incumbent_standardized() const {
    const FidelityGroup* group = highest_non_empty();
    if (group == nullptr) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : group->measurements()) {
      best = std::min(best, group->standardize_value(m.loss));
    }
    return best;
  }

  /// Best measurement in the highest non-empty group.
  const Measurement* best_measurement(const FidelityGroup** group_out = nullptr) const {
    const FidelityGroup* group = highest_non_empty();
    if (group == nullptr) return nullptr;
    if (group_out != nullptr) *group_out = group;
    const Measurement* best = nullptr;
    for (const auto& m : group->measurements()) {
      if (best == nullptr || m.loss < best->loss) best = &m;
    }
    return best;
  }

  bool operator==(const MeasurementStore& other) const {
    return groups_ == other.groups_;
  }

 private:
  std::vector<FidelityGroup> groups_;
};

struct MeasurementEvent {
  double t = 0.0;
  std::string request_id;
  const Configuration* config = nullptr;
  double resource = 0.0;
  std::optional<double> loss;
  double duration = 0.0;
  bool timed_out = false;
  std::string error;
};

struct EnsembleBuildEvent {
  double t = 0.0;
  std::vector<double> levels;
  std::vector<double> weights;
  std::vector<double> fractions;
  std::vector<std::size_t> counts;
};

struct BracketStartEvent {
  double t = 0.0;
  long long iteration = 0;
  int s = 0;
  int n1 = 0;
  double r1 = 0.0;
};

/// Receives run events in scheduler order; the history writer implements
/// this. Callbacks run on the scheduler thread.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_bracket_start(const BracketStartEvent&) {}
  virtual void on_measurement(const MeasurementEvent&) {}
  virtual void on_ensemble_build(const EnsembleBuildEvent&) {}
};

struct DriverConfig {
  ConfigurationSpace space;
  HBParams hb;
  SamplerParams sampler;
  ForestParams forest;
  EnsembleParams ensemble;
  int workers = 1;
  std::uint64_t seed = 0;
};

/// Prior progress recovered from a run history.
struct ResumeState {
  double consumed_budget = 0.0;
  long long brackets_started = 0;
  long long evaluations_done = 0;
  std::optional<MeasurementStore> store;
};

struct RunOutcome {
  std::optional<Configuration> best_config;
  double best_loss = std::numeric_limits<double>::infinity();
  double best_level = 0.0;
  bool best_at_top_fidelity = false;
  long long evaluations = 0;
  double consumed_budget = 0.0;
  std::shared_ptr<MeasurementStore> store;
};

namespace detail {

/// Budget meter covering both wall-clock and resource-unit accounting.
class BudgetMeter {
 public:
  BudgetMeter(const HBParams& params, double prior_consumed)
      : params_(params),
        prior_(prior_consumed),
        units_(0.0),
        started_(std::chrono::steady_clock::now()) {}

  void add_units(double resource) { units_ += resource; }

  double consumed() const {
    if (params_.budget_type == BudgetType::ResourceUnits) return prior_ + units_;
    return prior_ + std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                  started_)
                        .count();
  }

  bool exhausted() const { return consumed() >= params_.total_budget; }

  bool virtual_clock() const {
    return params_.budget_type == BudgetType::ResourceUnits;
  }

  /// Record timestamp: epoch seconds on the wall clock, cumulative
  /// consumed units on the virtual clock (keeps histories reproducible).
  double record_time() const {
    if (params_.budget_type == BudgetType::ResourceUnits) return consumed();
    return now_epoch_seconds();
  }

  static double now_epoch_seconds() {
    return std::chrono::duration<double>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

 private:
  HBParams params_;
  double prior_;
  double units_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace detail

/// Evaluates one rung, records measurements, and returns the indices of
/// the survivors to promote (ascending loss, ties by evaluation order and
/// then configuration id; failures never promote).
class SuccessiveHalvingRunner {
 public:
  SuccessiveHalvingRunner(Evaluator& evaluator, int workers,
                          MeasurementStore& store, RunObserver* observer,
                          detail::BudgetMeter& meter, long long& eval_counter)
      : evaluator_(evaluator),
        workers_(workers),
        store_(store),
        observer_(observer),
        meter_(meter),
        eval_counter_(eval_counter) {}

  /// Runs the bracket rung by rung. Stops early (after completing the
  /// rung in flight) once the budget is exhausted; returns false in that
  /// case.
  bool run_bracket(std::vector<Configuration> configs, const BracketPlan& plan) {
    for (std::size_t rung_index = 0; rung_index < plan.rungs.size(); ++rung_index) {
      if (rung_index > 0 && meter_.exhausted()) return false;
      const Rung& rung = plan.rungs[rung_index];
      auto ranked = run_rung(configs, rung.resource);
      if (rung_index + 1 == plan.rungs.size()) break;
      int keep = plan.rungs[rung_index + 1].n;
      std::vector<Configuration> survivors;
      survivors.reserve(static_cast<std::size_t>(keep));
      for (const auto& [loss, order, config] : ranked) {
        if (static_cast<int>(survivors.size()) == keep) break;
        if (!std::isfinite(loss)) break;  // +inf sentinel: never promoted
        survivors.push_back(config);
      }
      if (survivors.empty()) return !meter_.exhausted();
      configs = std::move(survivors);
    }
    return !meter_.exhausted();
  }

 private:
  using RankedEntry = std::tuple<double, std::size_t, Configuration>;

  std::vector<RankedEntry> run_rung(const std::vector<Configuration>& configs,
                                    double resource) {
    std::vector<EvaluationRequest> requests;
    requests.reserve(configs.size());
    for (const auto& config : configs) {
      requests.push_back(
          {config, resource, "eval-" + std::to_string(++eval_counter_)});
    }
    auto results = evaluate_batch(evaluator_, requests, workers_);

    std::vector<RankedEntry> ranked;
    ranked.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const auto& result = results[i];
      double loss = result.failed() ? std::numeric_limits<double>::infinity()
                                    : *result.loss;
      meter_.add_units(resource);
      double duration =
          meter_.virtual_clock() ? resource : result.duration_seconds;
      if (!result.failed()) {
        store_.add(configs[i], resource, loss);
      }
      if (observer_ != nullptr) {
        MeasurementEvent event;
        event.t = meter_.record_time();
        event.request_id = result.request_id;
        event.config = &configs[i];
        event.resource = resource;
        event.loss = result.loss;
        event.duration = duration;
        event.timed_out = result.timed_out;
        event.error = result.error;
        observer_->on_measurement(event);
      }
      ranked.emplace_back(loss, i, configs[i]);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const RankedEntry& a, const RankedEntry& b) {
                if (std::get<0>(a) != std::get<0>(b)) {
                  return std::get<0>(a) < std::get<0>(b);
                }
                if (std::get<1>(a) != std::get<1>(b)) {
                  return std::get<1>(a) < std::get<1>(b);
                }
                return std::get<2>(a).id() < std::get<2>(b).id();
              });
    return ranked;
  }

  Evaluator& evaluator_;
  int workers_;
  MeasurementStore& store_;
  RunObserver* observer_;
  detail::BudgetMeter& meter_;
  long long& eval_counter_;
};

/// The MFES-HB driver: loops Hyperband brackets until the budget
/// exhausts; samples each bracket's configurations through the ensemble
/// surrogate, runs successive halving, merges the new measurements, and
/// rebuilds the ensemble.
inline RunOutcome run_mfes_hb(const DriverConfig& config, Evaluator& evaluator,
                              RunObserver* observer = nullptr,
                              const ResumeState* resume = nullptr) {
  config.hb.validate();
  config.sampler.validate();
  config.forest.validate();
  config.ensemble.validate();
  if (config.workers < 1) throw ConfigError("workers must be at least 1");

  double prior = resume != nullptr ? resume->consumed_budget : 0.0;
  long long bracket_ordinal = resume != nullptr ? resume->brackets_started : 0;
  long long eval_counter = resume != nullptr ? resume->evaluations_done : 0;
  long long initial_evals = eval_counter;

  detail::BudgetMeter meter(config.hb, prior);
  auto store = std::make_shared<MeasurementStore>(
      (resume != nullptr && resume->store.has_value())
          ? *resume->store
          : MeasurementStore(config.hb.max_resource, config.hb.eta));

  std::uint64_t session_seed = config.seed;
  if (bracket_ordinal != 0) {
    session_seed = fnv1a64(static_cast<std::uint64_t>(bracket_ordinal),
                           fnv1a64(config.seed, 1469598103934665603ull));
  }
  // Separate streams keep the configuration draws independent of how much
  // randomness an ensemble build happens to consume.
  RandomSource sample_rng(session_seed);
  RandomSource model_rng(fnv1a64(session_seed, 0x6d6f64656cull));

  int s_max = max_bracket_index(config.hb.max_resource, config.hb.eta);
  int brackets_per_iteration = s_max + 1;

  std::optional<EnsembleSurrogate> ensemble;
  if (resume != nullptr && resume->store.has_value()) {
    ensemble = build_ensemble(config.space, store->group_pointers(), config.forest,
                              config.ensemble, model_rng);
  }

  SuccessiveHalvingRunner runner(evaluator, config.workers, *store, observer,
                                 meter, eval_counter);

  while (!meter.exhausted()) {
    long long iteration = bracket_ordinal / brackets_per_iteration;
    int s = s_max - static_cast<int>(bracket_ordinal % brackets_per_iteration);
    BracketPlan plan = make_bracket_plan(config.hb, s);
    ++bracket_ordinal;

    if (observer != nullptr) {
      observer->on_bracket_start(
          {meter.record_time(), iteration, plan.s, plan.n1, plan.r1});
    }

    std::optional<double> y_star = store->incumbent_standardized();
    const EnsembleSurrogate* model = ensemble.has_value() ? &*ensemble : nullptr;
    std::vector<Configuration> configs;
    configs.reserve(static_cast<std::size_t>(plan.n1));
    for (int i = 0; i < plan.n1; ++i) {
      configs.push_back(
          sample_next(config.space, model, config.sampler, y_star, sample_rng)
              .config);
    }

    bool keep_going = runner.run_bracket(std::move(configs), plan);

    ensemble = build_ensemble(config.space, store->group_pointers(), config.forest,
                              config.ensemble, model_rng);
    if (ensemble.has_value() && observer != nullptr) {
      EnsembleBuildEvent event;
      event.t = meter.record_time();
      for (const auto& base : ensemble->bases()) {
        event.levels.push_back(base.resource_level);
        event.weights.push_back(base.weight);
        event.fractions.push_back(base.p);
        event.counts.push_back(base.measurements);
      }
      observer->on_ensemble_build(event);
    }

    if (!keep_going) break;
  }

  RunOutcome outcome;
  outcome.evaluations = eval_counter - initial_evals;
  outcome.consumed_budget = meter.consumed();
  outcome.store = store;
  const FidelityGroup* group = nullptr;
  const Measurement* best = store->best_measurement(&group);
  if (best != nullptr) {
    outcome.best_config = best->config;
    outcome.best_loss = best->loss;
    outcome.best_level = group->resource_level();
    outcome.best_at_top_fidelity =
        group->resource_level() == store->top_group().resource_level();
  }
  return outcome;
}

}  // namespace mfes
