#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "mfes/benchmarks.hpp"
#include "mfes/history.hpp"
#include "mfes/hyperband.hpp"
#include "mfes/run_config.hpp"
#include "mfes/subprocess.hpp"

namespace mfes {

/// Everything needed to execute a run: the space, the evaluator behind
/// it, and (for builtins) the benchmark for reporting.
struct SessionSetup {
  ConfigurationSpace space;
  std::unique_ptr<Evaluator> evaluator;
  std::shared_ptr<const Benchmark> benchmark;  // null for subprocess evaluators
};

inline SessionSetup make_session_setup(const RunConfig& config) {
  if (config.evaluator.is_subprocess()) {
    return {ConfigurationSpace(config.space),
            std::make_unique<SubprocessEvaluator>(config.evaluator.command,
                                                  config.evaluator.timeout_seconds),
            nullptr};
  }
  BenchmarkSpec spec;
  spec.name = config.evaluator.builtin;
  spec.dimension = config.evaluator.dimension;
  spec.noise_std = config.evaluator.noise_std;
  spec.fidelity_bias = config.evaluator.fidelity_bias;
  std::shared_ptr<const Benchmark> benchmark = make_benchmark(std::move(spec));
  ConfigurationSpace space = benchmark->space();
  auto evaluator = std::make_unique<SyntheticEvaluator>(
      benchmark, config.hb.max_resource, config.seed);
  return {std::move(space), std::move(evaluator), std::move(benchmark)};
}

inline DriverConfig make_driver_config(const RunConfig& config,
                                       ConfigurationSpace space) {
  DriverConfig driver{std::move(space), config.hb,     config.sampler,
                      config.forest,    config.ensemble, config.workers,
                      config.seed};
  return driver;
}

struct SessionResult {
  RunOutcome outcome;
  bool resumed_nothing = false;  // resume found the budget already exhausted
};

/// Executes a fresh run, streaming records to history_path.
inline SessionResult run_session(const RunConfig& config,
                                 const std::filesystem::path& history_path) {
  SessionSetup setup = make_session_setup(config);
  HistoryWriter writer(history_path);
  detail::BudgetMeter meter(config.hb, 0.0);
  nlohmann::json meta = run_config_to_json(config);
  meta["resumed"] = false;
  writer.write_run_meta(meter.record_time(), meta);
  SessionResult result;
  result.outcome =
      run_mfes_hb(make_driver_config(config, setup.space), *setup.evaluator, &writer);
  return result;
}

/// Reconstructs prior progress from a history file and continues the
/// bracket loop from the next unstarted bracket under the remaining
/// budget. A completed run resumes into an immediate no-op.
inline SessionResult resume_session(const std::filesystem::path& history_path,
                                    std::ostream* warn_stream = &std::cerr) {
  History history = load_history(history_path, warn_stream);

  nlohmann::json meta = history.meta;
  meta.erase("kind");
  meta.erase("t");
  meta.erase("version");
  meta.erase("resumed");
  RunConfig config = parse_run_config(meta.dump());
  validate_run_config(config);

  SessionSetup setup = make_session_setup(config);

  ResumeState resume;
  resume.consumed_budget = history.consumed(config.hb.budget_type);
  resume.brackets_started = static_cast<long long>(history.bracket_starts.size());
  resume.evaluations_done = static_cast<long long>(history.measurements.size());
  resume.store = rebuild_store(history, setup.space, config.hb.max_resource,
                               config.hb.eta);

  SessionResult result;
  if (resume.consumed_budget >= config.hb.total_budget) {
    // Nothing left to do; report the stored best without touching the file.
    result.resumed_nothing = true;
    result.outcome.store = std::make_shared<MeasurementStore>(*resume.store);
    result.outcome.consumed_budget = resume.consumed_budget;
    const FidelityGroup* group = nullptr;
    const Measurement* best = result.outcome.store->best_measurement(&group);
    if (best != nullptr) {
      result.outcome.best_config = best->config;
      result.outcome.best_loss = best->loss;
      result.outcome.best_level = group->resource_level();
      result.outcome.best_at_top_fidelity =
          group->resource_level() ==
          result.outcome.store->top_group().resource_level();
    }
    return result;
  }

  HistoryWriter writer(history_path, /*append=*/true);
  detail::BudgetMeter meter(config.hb, resume.consumed_budget);
  nlohmann::json new_meta = run_config_to_json(config);
  new_meta["resumed"] = true;
  writer.write_run_meta(meter.record_time(), new_meta);
  result.outcome = run_mfes_hb(make_driver_config(config, setup.space),
                               *setup.evaluator, &writer, &resume);
  return result;
}

}  // namespace mfes
