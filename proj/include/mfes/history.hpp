#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfes/config_space.hpp"
#include "mfes/errors.hpp"
#include "mfes/hyperband.hpp"
#include "mfes/subprocess.hpp"
#include "mfes/version.hpp"

namespace mfes {

using json = nlohmann::json;

inline ParamValue param_value_from_json(const json& value) {
  if (value.is_number_integer() || value.is_number_unsigned()) {
    return value.get<std::int64_t>();
  }
  if (value.is_number_float()) return value.get<double>();
  if (value.is_string()) return value.get<std::string>();
  throw ConfigError("unsupported parameter value type in JSON");
}

inline std::map<std::string, ParamValue> config_values_from_json(const json& object) {
  std::map<std::string, ParamValue> values;
  for (auto it = object.begin(); it != object.end(); ++it) {
    values[it.key()] = param_value_from_json(it.value());
  }
  return values;
}

/// Append-only JSON-lines run history. One record per line; every record
/// is flushed before the scheduler takes its next step, so a killed run
/// loses at most the line being written.
class HistoryWriter : public RunObserver {
 public:
  explicit HistoryWriter(const std::filesystem::path& path, bool append = false)
      : stream_(path, append ? std::ios::app : std::ios::trunc) {
    if (!stream_) {
      throw ConfigError("cannot open history file '" + path.string() + "'");
    }
  }

  void write_run_meta(double t, const json& meta_payload) {
    json record = meta_payload;
    record["kind"] = "run_meta";
    record["t"] = t;
    record["version"] = MFES_HB_VERSION;
    write(record);
  }

  void on_bracket_start(const BracketStartEvent& event) override {
    write({{"kind", "bracket_start"},
           {"t", event.t},
           {"iteration", event.iteration},
           {"s", event.s},
           {"n1", event.n1},
           {"r1", event.r1}});
  }

  void on_measurement(const MeasurementEvent& event) override {
    json record = {{"kind", "measurement"},
                   {"t", event.t},
                   {"request_id", event.request_id},
                   {"config", config_values_to_json(*event.config)},
                   {"resource", event.resource},
                   {"duration", event.duration}};
    if (event.loss.has_value()) {
      record["loss"] = *event.loss;
    } else {
      record["loss"] = nullptr;
      record["failed"] = true;
      record["timed_out"] = event.timed_out;
      record["error"] = event.error;
    }
    write(record);
  }

  void on_ensemble_build(const EnsembleBuildEvent& event) override {
    write({{"kind", "ensemble_build"},
           {"t", event.t},
           {"levels", event.levels},
           {"weights", event.weights},
           {"p", event.fractions},
           {"n", event.counts}});
  }

 private:
  void write(const json& record) {
    stream_ << record.dump() << '\n';
    stream_.flush();
  }

  std::ofstream stream_;
};

struct MeasurementRecord {
  double t = 0.0;
  std::string request_id;
  std::map<std::string, ParamValue> config_values;
  double resource = 0.0;
  std::optional<double> loss;
  double duration = 0.0;
};

struct EnsembleRecord {
  double t = 0.0;
  std::vector<double> levels;
  std::vector<double> weights;
  std::vector<double> fractions;
  std::vector<std::size_t> counts;
};

struct BracketRecord {
  double t = 0.0;
  long long iteration = 0;
  int s = 0;
  int n1 = 0;
  double r1 = 0.0;
};

/// Parsed run history. Sessions are delimited by run_meta records (a
/// resumed run appends a fresh one).
struct History {
  json meta;  // first run_meta of the file
  std::vector<double> session_starts;
  std::vector<MeasurementRecord> measurements;
  std::vector<EnsembleRecord> ensemble_builds;
  std::vector<BracketRecord> bracket_starts;
  double last_timestamp = 0.0;
  bool truncated_tail = false;

  /// Budget consumed so far: resource units are summed over every
  /// attempted evaluation; wall-clock sums each session's span.
  double consumed(BudgetType type) const {
    if (type == BudgetType::ResourceUnits) {
      double units = 0.0;
      for (const auto& m : measurements) units += m.resource;
      return units;
    }
    double seconds = 0.0;
    for (std::size_t i = 0; i < session_starts.size(); ++i) {
      double end = i < session_ends.size() ? session_ends[i] : last_timestamp;
      seconds += std::max(0.0, end - session_starts[i]);
    }
    return seconds;
  }

  std::vector<double> session_ends;  // filled during load
};

/// Loads and validates a history file. The final line may be truncated
/// (ignored with a warning on warn_stream); any earlier malformed line is
/// a hard error.
inline History load_history(const std::filesystem::path& path,
                            std::ostream* warn_stream = &std::cerr) {
  std::ifstream in(path);
  if (!in) {
    throw HistoryError("cannot open history file '" + path.string() + "'", 0);
  }
  std::vector<std::pair<long, std::string>> lines;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) lines.emplace_back(line_no, line);
  }
  if (lines.empty()) {
    throw HistoryError("history file is empty", 0);
  }

  History history;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& [no, text] = lines[i];
    json record = json::parse(text, nullptr, false);
    bool bad = record.is_discarded() || !record.is_object() ||
               !record.contains("kind") || !record.contains("t");
    if (bad) {
      if (i + 1 == lines.size()) {
        history.truncated_tail = true;
        if (warn_stream != nullptr) {
          *warn_stream << "warning: ignoring truncated final history line " << no
                       << "\n";
        }
        break;
      }
      throw HistoryError("malformed history record", no);
    }
    std::string kind = record["kind"].get<std::string>();
    double t = record["t"].get<double>();
    if (history.meta.is_null() && kind != "run_meta") {
      throw HistoryError("history must start with a run_meta record", no);
    }
    try {
      if (kind == "run_meta") {
        if (history.meta.is_null()) history.meta = record;
        if (!history.session_starts.empty()) {
          // The previous session ended at its last recorded timestamp;
          // the downtime before this resume does not count as consumed.
          history.session_ends.push_back(history.last_timestamp);
        }
        history.session_starts.push_back(t);
      } else if (kind == "measurement") {
        MeasurementRecord m;
        m.t = t;
        m.request_id = record["request_id"].get<std::string>();
        m.config_values = config_values_from_json(record["config"]);
        m.resource = record["resource"].get<double>();
        m.duration = record["duration"].get<double>();
        if (!record["loss"].is_null()) m.loss = record["loss"].get<double>();
        history.measurements.push_back(std::move(m));
      } else if (kind == "ensemble_build") {
        EnsembleRecord e;
        e.t = t;
        e.levels = record["levels"].get<std::vector<double>>();
        e.weights = record["weights"].get<std::vector<double>>();
        e.fractions = record["p"].get<std::vector<double>>();
        e.counts = record["n"].get<std::vector<std::size_t>>();
        history.ensemble_builds.push_back(std::move(e));
      } else if (kind == "bracket_start") {
        BracketRecord b;
        b.t = t;
        b.iteration = record["iteration"].get<long long>();
        b.s = record["s"].get<int>();
        b.n1 = record["n1"].get<int>();
        b.r1 = record["r1"].get<double>();
        history.bracket_starts.push_back(b);
      } else {
        throw HistoryError("unknown record kind '" + kind + "'", no);
      }
    } catch (const json::exception& e) {
      throw HistoryError(std::string("malformed history record: ") + e.what(), no);
    }
    history.last_timestamp = t;
  }
  if (history.meta.is_null()) {
    throw HistoryError("history has no run_meta record", 0);
  }
  // Close the final session span.
  if (history.session_starts.size() > history.session_ends.size()) {
    history.session_ends.push_back(history.last_timestamp);
  }
  return history;
}

/// Rebuilds the fidelity-grouped measurement store from history records.
/// Failed measurements never trained a surrogate, so they are skipped.
inline MeasurementStore rebuild_store(const History& history,
                                      const ConfigurationSpace& space,
                                      double max_resource, double eta) {
  MeasurementStore store(max_resource, eta);
  for (const auto& m : history.measurements) {
    if (!m.loss.has_value()) continue;
    store.add(space.make_configuration(m.config_values), m.resource, *m.loss);
  }
  return store;
}

struct IncumbentRow {
  double t = 0.0;
  double best_loss = 0.0;
};

/// Running minimum of the top-fidelity losses over time, the data behind
/// validation-error-vs-wall-clock curves.
inline std::vector<IncumbentRow> incumbent_trajectory(const History& history,
                                                      double top_level) {
  std::vector<IncumbentRow> rows;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : history.measurements) {
    if (!m.loss.has_value() || m.resource != top_level) continue;
    best = std::min(best, *m.loss);
    rows.push_back({m.t, best});
  }
  return rows;
}

enum class ExportFormat { Csv, JsonLines };

inline ExportFormat parse_export_format(const std::string& name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "jsonl") return ExportFormat::JsonLines;
  throw ConfigError("unknown export format '" + name + "' (use csv or jsonl)");
}

/// Writes the incumbent table and the per-build weights table under
/// out_dir. Returns the two file paths (incumbent, weights).
inline std::pair<std::filesystem::path, std::filesystem::path> export_history(
    const History& history, double top_level, ExportFormat format,
    const std::filesystem::path& out_dir, std::ostream* warn_stream = &std::cerr) {
  std::filesystem::create_directories(out_dir);
  auto rows = incumbent_trajectory(history, top_level);
  if (rows.empty() && warn_stream != nullptr) {
    *warn_stream << "warning: history has no top-fidelity measurements; "
                    "incumbent table is empty\n";
  }
  const char* ext = format == ExportFormat::Csv ? ".csv" : ".jsonl";
  auto incumbent_path = out_dir / (std::string("incumbent") + ext);
  auto weights_path = out_dir / (std::string("weights") + ext);

  std::ofstream inc(incumbent_path);
  std::ofstream wts(weights_path);
  if (!inc || !wts) throw ConfigError("cannot write export files");

  if (format == ExportFormat::Csv) {
    inc << "wall_clock_seconds,best_loss\n";
    for (const auto& row : rows) {
      inc << json(row.t).dump() << ',' << json(row.best_loss).dump() << '\n';
    }
    std::size_t k = history.ensemble_builds.empty()
                        ? 0
                        : history.ensemble_builds.front().weights.size();
    wts << "wall_clock_seconds";
    for (std::size_t i = 1; i <= k; ++i) wts << ",w" << i;
    for (std::size_t i = 1; i <= k; ++i) wts << ",p" << i;
    wts << '\n';
    for (const auto& build : history.ensemble_builds) {
      wts << json(build.t).dump();
      for (double w : build.weights) wts << ',' << json(w).dump();
      for (double p : build.fractions) wts << ',' << json(p).dump();
      wts << '\n';
    }
  } else {
    for (const auto& row : rows) {
      inc << json({{"wall_clock_seconds", row.t}, {"best_loss", row.best_loss}}).dump()
          << '\n';
    }
    for (const auto& build : history.ensemble_builds) {
      wts << json({{"wall_clock_seconds", build.t},
                   {"weights", build.weights},
                   {"p", build.fractions},
                   {"n", build.counts}})
                 .dump()
          << '\n';
    }
  }
  return {incumbent_path, weights_path};
}

}  // namespace mfes
