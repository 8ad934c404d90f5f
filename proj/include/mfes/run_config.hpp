#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfes/benchmarks.hpp"
#include "mfes/config_space.hpp"
#include "mfes/ensemble.hpp"
#include "mfes/errors.hpp"
#include "mfes/hyperband.hpp"

namespace mfes {

/// Evaluator selection from the run config: exactly one of builtin
/// benchmark or external command.
struct EvaluatorConfig {
  std::string builtin;             // benchmark name
  std::size_t dimension = 0;       // counting-ones only
  double noise_std = 0.0;
  double fidelity_bias = 0.0;
  std::string command;             // subprocess command line
  double timeout_seconds = 0.0;    // mandatory for subprocess evaluators

  bool is_subprocess() const { return !command.empty(); }
};

/// Complete run description: the parsed, validated contents of a config
/// file plus any command-line overrides.
struct RunConfig {
  std::vector<ParameterSpec> space;
  HBParams hb;
  SamplerParams sampler;
  ForestParams forest;
  EnsembleParams ensemble;
  EvaluatorConfig evaluator;
  int workers = 1;
  std::uint64_t seed = 0;
};

/// Optional command-line overrides; flags beat file values beat defaults.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;
  std::optional<std::string> budget_type;
  std::optional<int> workers;
  std::optional<double> rho;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& object,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    if (allowed.count(it.key()) == 0) {
      throw ConfigError("unknown key '" + where + it.key() + "' in run config");
    }
  }
}

inline ParameterSpec parse_parameter(const nlohmann::json& p, std::size_t index) {
  std::string where = "space[" + std::to_string(index) + "].";
  if (!p.is_object()) throw ConfigError(where + " entry must be an object");
  reject_unknown_keys(p, {"name", "type", "low", "high", "log", "choices"}, where);
  if (!p.contains("name") || !p.contains("type")) {
    throw ConfigError(where + "name and " + where + "type are required");
  }
  std::string name = p["name"].get<std::string>();
  std::string type = p["type"].get<std::string>();
  bool log_scale = p.value("log", false);
  if (type == "continuous") {
    return ParameterSpec::continuous(name, p.at("low").get<double>(),
                                     p.at("high").get<double>(), log_scale);
  }
  if (type == "integer") {
    return ParameterSpec::integer(name, p.at("low").get<std::int64_t>(),
                                  p.at("high").get<std::int64_t>(), log_scale);
  }
  if (type == "categorical") {
    return ParameterSpec::categorical(
        name, p.at("choices").get<std::vector<std::string>>());
  }
  throw ConfigError(where + "type '" + type +
                    "' is not one of continuous/integer/categorical");
}

inline BudgetType parse_budget_type(const std::string& name) {
  if (name == "seconds") return BudgetType::Seconds;
  if (name == "resource_units") return BudgetType::ResourceUnits;
  throw ConfigError("hb.budget_type '" + name +
                    "' is not one of seconds/resource_units");
}

inline long line_of_byte_offset(const std::string& text, std::size_t byte) {
  long line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

inline nlohmann::json parameter_to_json(const ParameterSpec& p) {
  nlohmann::json out = {{"name", p.name()}};
  switch (p.kind()) {
    case ParamKind::Continuous:
      out["type"] = "continuous";
      out["low"] = p.low();
      out["high"] = p.high();
      out["log"] = p.log_scale();
      break;
    case ParamKind::Integer:
      out["type"] = "integer";
      out["low"] = static_cast<std::int64_t>(p.low());
      out["high"] = static_cast<std::int64_t>(p.high());
      out["log"] = p.log_scale();
      break;
    case ParamKind::Categorical:
      out["type"] = "categorical";
      out["choices"] = p.choices();
      break;
  }
  return out;
}

inline nlohmann::json run_config_to_json(const RunConfig& config) {
  nlohmann::json space = nlohmann::json::array();
  for (const auto& p : config.space) space.push_back(parameter_to_json(p));
  nlohmann::json evaluator;
  if (config.evaluator.is_subprocess()) {
    evaluator = {{"command", config.evaluator.command},
                 {"timeout_seconds", config.evaluator.timeout_seconds}};
  } else {
    evaluator = {{"builtin", config.evaluator.builtin},
                 {"noise_std", config.evaluator.noise_std},
                 {"fidelity_bias", config.evaluator.fidelity_bias}};
    if (config.evaluator.dimension != 0) {
      evaluator["dimension"] = config.evaluator.dimension;
    }
  }
  return {{"space", space},
          {"hb",
           {{"R", config.hb.max_resource},
            {"eta", config.hb.eta},
            {"budget", config.hb.total_budget},
            {"budget_type", config.hb.budget_type == BudgetType::Seconds
                                ? "seconds"
                                : "resource_units"}}},
          {"sampler",
           {{"rho", config.sampler.rho}, {"n_candidates", config.sampler.n_candidates}}},
          {"forest",
           {{"n_trees", config.forest.n_trees},
            {"min_samples_leaf", config.forest.min_samples_leaf},
            {"max_features_ratio", config.forest.max_features_ratio},
            {"bootstrap", config.forest.bootstrap},
            {"variance_floor", config.forest.variance_floor}}},
          {"ensemble",
           {{"theta", config.ensemble.theta},
            {"k_full_threshold", config.ensemble.k_full_threshold}}},
          {"evaluator", evaluator},
          {"workers", config.workers},
          {"seed", config.seed}};
}

/// Parses a run config from JSON text. Unknown keys are rejected; value
/// errors name the offending field.
inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error at line " +
                      std::to_string(detail::line_of_byte_offset(text, e.byte)) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("run config must be a JSON object");
  detail::reject_unknown_keys(root,
                              {"space", "hb", "sampler", "forest", "ensemble",
                               "evaluator", "workers", "seed"},
                              "");

  RunConfig config;
  try {
    if (root.contains("space")) {
      const auto& space = root["space"];
      if (!space.is_array()) throw ConfigError("space must be an array");
      for (std::size_t i = 0; i < space.size(); ++i) {
        config.space.push_back(detail::parse_parameter(space[i], i));
      }
    }

    if (!root.contains("hb") || !root["hb"].is_object()) {
      throw ConfigError("hb section is required");
    }
    const auto& hb = root["hb"];
    detail::reject_unknown_keys(hb, {"R", "eta", "budget", "budget_type"}, "hb.");
    if (!hb.contains("R")) throw ConfigError("hb.R is required");
    if (!hb.contains("budget")) throw ConfigError("hb.budget is required");
    config.hb.max_resource = hb["R"].get<double>();
    config.hb.eta = hb.value("eta", 3.0);
    config.hb.total_budget = hb["budget"].get<double>();
    config.hb.budget_type =
        detail::parse_budget_type(hb.value("budget_type", "seconds"));

    if (root.contains("sampler")) {
      const auto& sampler = root["sampler"];
      detail::reject_unknown_keys(sampler, {"rho", "n_candidates"}, "sampler.");
      config.sampler.rho = sampler.value("rho", config.sampler.rho);
      config.sampler.n_candidates =
          sampler.value("n_candidates", config.sampler.n_candidates);
    }

    if (root.contains("forest")) {
      const auto& forest = root["forest"];
      detail::reject_unknown_keys(forest,
                                  {"n_trees", "min_samples_leaf",
                                   "max_features_ratio", "bootstrap",
                                   "variance_floor"},
                                  "forest.");
      config.forest.n_trees = forest.value("n_trees", config.forest.n_trees);
      config.forest.min_samples_leaf =
          forest.value("min_samples_leaf", config.forest.min_samples_leaf);
      config.forest.max_features_ratio =
          forest.value("max_features_ratio", config.forest.max_features_ratio);
      config.forest.bootstrap = forest.value("bootstrap", config.forest.bootstrap);
      config.forest.variance_floor =
          forest.value("variance_floor", config.forest.variance_floor);
    }

    if (root.contains("ensemble")) {
      const auto& ensemble = root["ensemble"];
      detail::reject_unknown_keys(ensemble, {"theta", "k_full_threshold"},
                                  "ensemble.");
      config.ensemble.theta = ensemble.value("theta", config.ensemble.theta);
      config.ensemble.k_full_threshold =
          ensemble.value("k_full_threshold", config.ensemble.k_full_threshold);
    }

    if (!root.contains("evaluator") || !root["evaluator"].is_object()) {
      throw ConfigError("evaluator section is required");
    }
    const auto& evaluator = root["evaluator"];
    detail::reject_unknown_keys(evaluator,
                                {"builtin", "dimension", "noise_std",
                                 "fidelity_bias", "command", "timeout_seconds"},
                                "evaluator.");
    config.evaluator.builtin = evaluator.value("builtin", "");
    config.evaluator.command = evaluator.value("command", "");
    config.evaluator.dimension = evaluator.value("dimension", std::size_t{0});
    config.evaluator.noise_std = evaluator.value("noise_std", 0.0);
    config.evaluator.fidelity_bias = evaluator.value("fidelity_bias", 0.0);
    config.evaluator.timeout_seconds = evaluator.value("timeout_seconds", 0.0);

    config.workers = root.value("workers", 1);
    config.seed = root.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid run config value: ") + e.what());
  }
  return config;
}

inline void apply_overrides(RunConfig& config, const RunOverrides& overrides) {
  if (overrides.seed.has_value()) config.seed = *overrides.seed;
  if (overrides.budget.has_value()) config.hb.total_budget = *overrides.budget;
  if (overrides.budget_type.has_value()) {
    config.hb.budget_type = detail::parse_budget_type(*overrides.budget_type);
  }
  if (overrides.workers.has_value()) config.workers = *overrides.workers;
  if (overrides.rho.has_value()) config.sampler.rho = *overrides.rho;
}

/// Semantic validation beyond shape: ranges, cross-field rules, evaluator
/// selection. Throws ConfigError naming the offending field.
inline void validate_run_config(const RunConfig& config) {
  bool has_builtin = !config.evaluator.builtin.empty();
  bool has_command = !config.evaluator.command.empty();
  if (has_builtin == has_command) {
    throw ConfigError(
        "evaluator must set exactly one of evaluator.builtin or "
        "evaluator.command");
  }
  if (has_command) {
    if (config.space.empty()) {
      throw ConfigError("space is required for subprocess evaluators");
    }
    if (!(config.evaluator.timeout_seconds > 0.0)) {
      throw ConfigError(
          "evaluator.timeout_seconds must be positive for subprocess evaluators");
    }
  } else if (!config.space.empty()) {
    throw ConfigError(
        "space must be omitted for builtin benchmarks (the benchmark defines it)");
  }
  try {
    config.hb.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("hb: ") + e.what());
  }
  try {
    config.sampler.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sampler: ") + e.what());
  }
  try {
    config.forest.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("forest: ") + e.what());
  }
  try {
    config.ensemble.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("ensemble: ") + e.what());
  }
  if (config.workers < 1) throw ConfigError("workers must be at least 1");
  if (has_command) {
    ConfigurationSpace check(config.space);  // throws ConfigError on bad specs
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path,
                                 const RunOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config = parse_run_config(buffer.str());
  apply_overrides(config, overrides);
  validate_run_config(config);
  return config;
}

}  // namespace mfes
