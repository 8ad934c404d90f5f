// mfes-hb command line front end: run, resume, export, bench-list.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfes/benchmarks.hpp"
#include "mfes/history.hpp"
#include "mfes/run_config.hpp"
#include "mfes/runner.hpp"
#include "mfes/version.hpp"

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitEvaluatorSetup = 3;
constexpr int kExitCorruptHistory = 4;

std::filesystem::path default_history_dir() {
  if (const char* dir = std::getenv("MFES_HB_HISTORY_DIR")) return dir;
  return ".";
}

void print_outcome(const mfes::RunOutcome& outcome) {
  if (!outcome.best_config.has_value()) {
    std::cout << "no successful measurements recorded\n";
    return;
  }
  if (!outcome.best_at_top_fidelity) {
    std::cerr << "warning: no full-fidelity measurements; best configuration "
                 "comes from resource level "
              << outcome.best_level << "\n";
  }
  std::cout << "best loss: " << outcome.best_loss << " (resource level "
            << outcome.best_level << ")\n";
  std::cout << "best configuration: "
            << mfes::config_values_to_json(*outcome.best_config).dump() << "\n";
  std::cout << "evaluations: " << outcome.evaluations
            << ", budget consumed: " << outcome.consumed_budget << "\n";
}

int cli_run(const std::string& config_path, const std::string& history_arg,
            const mfes::RunOverrides& overrides) {
  mfes::RunConfig config;
  try {
    config = mfes::load_run_config(config_path, overrides);
  } catch (const mfes::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
  std::filesystem::path history = history_arg.empty()
                                      ? default_history_dir() /
                                            ("mfes-hb-run-" +
                                             std::to_string(config.seed) + ".jsonl")
                                      : std::filesystem::path(history_arg);
  try {
    mfes::SessionResult result = mfes::run_session(config, history);
    std::cout << "history: " << history.string() << "\n";
    print_outcome(result.outcome);
    return 0;
  } catch (const mfes::EvaluatorSetupError& e) {
    std::cerr << "evaluator setup failed: " << e.what() << "\n";
    return kExitEvaluatorSetup;
  } catch (const mfes::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
}

int cli_resume(const std::string& history_arg) {
  try {
    mfes::SessionResult result = mfes::resume_session(history_arg);
    if (result.resumed_nothing) {
      std::cout << "run already exhausted its budget; nothing to resume\n";
    }
    print_outcome(result.outcome);
    return 0;
  } catch (const mfes::HistoryError& e) {
    std::cerr << "corrupt history (line " << e.line() << "): " << e.what() << "\n";
    return kExitCorruptHistory;
  } catch (const mfes::EvaluatorSetupError& e) {
    std::cerr << "evaluator setup failed: " << e.what() << "\n";
    return kExitEvaluatorSetup;
  } catch (const mfes::ConfigError& e) {
    std::cerr << "invalid config in history: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
}

int cli_export(const std::string& history_arg, const std::string& format_name,
               const std::string& out_dir) {
  try {
    mfes::History history = mfes::load_history(history_arg);
    double top_level = history.meta.at("hb").at("R").get<double>();
    auto format = mfes::parse_export_format(format_name);
    auto [incumbent, weights] =
        mfes::export_history(history, top_level, format, out_dir);
    std::cout << "wrote " << incumbent.string() << " and " << weights.string()
              << "\n";
    return 0;
  } catch (const mfes::HistoryError& e) {
    std::cerr << "corrupt history (line " << e.line() << "): " << e.what() << "\n";
    return kExitCorruptHistory;
  } catch (const mfes::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalidConfig;
  }
}

int cli_bench_list() {
  for (const auto& name : mfes::benchmark_names()) {
    auto benchmark = mfes::make_benchmark({name, 0, 0.0, 0.0});
    std::cout << name << "  dimension=" << benchmark->space().dimension()
              << "  optimum=" << benchmark->optimum() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MFES-HB: multi-fidelity ensemble-surrogate Hyperband"};
  app.set_version_flag("--version", MFES_HB_VERSION);
  app.require_subcommand(1);

  std::string config_path, history_path, format_name = "csv", out_dir = ".";
  mfes::RunOverrides overrides;

  auto add_override_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", overrides.seed, "override the run seed");
    cmd->add_option("--budget", overrides.budget, "override the total budget");
    cmd->add_option("--budget-type", overrides.budget_type,
                    "override budget accounting: seconds or resource_units");
    cmd->add_option("--workers", overrides.workers, "override the worker count");
    cmd->add_option("--rho", overrides.rho, "override the random fraction");
  };

  auto* run = app.add_subcommand("run", "start a new optimization run");
  run->add_option("--config", config_path, "run config file (JSON)")->required();
  run->add_option("--history", history_path, "history file to write");
  add_override_flags(run);

  auto* resume = app.add_subcommand("resume", "continue a run from its history");
  resume->add_option("--history", history_path, "history file of the run")
      ->required();

  auto* exp = app.add_subcommand("export", "export tables from a history");
  exp->add_option("--history", history_path, "history file to read")->required();
  exp->add_option("--format", format_name, "csv or jsonl");
  exp->add_option("--out-dir", out_dir, "directory for the exported tables");

  app.add_subcommand("bench-list", "list built-in benchmarks");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cli_run(config_path, history_path, overrides);
  if (resume->parsed()) return cli_resume(history_path);
  if (exp->parsed()) return cli_export(history_path, format_name, out_dir);
  return cli_bench_list();
}
