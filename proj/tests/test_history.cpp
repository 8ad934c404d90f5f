#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfes/history.hpp"
#include "mfes/runner.hpp"

using mfes::BudgetType;
using mfes::RunConfig;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  for (const auto& line : lines) out << line << '\n';
}

// Hartmann-3 run with a resource-unit budget; one full HB iteration at
// R=9 costs 78 units.
RunConfig small_run_config(double budget_units, std::uint64_t seed) {
  RunConfig config;
  config.hb = {9.0, 3.0, budget_units, BudgetType::ResourceUnits};
  config.sampler = {0.2, 50};
  config.evaluator.builtin = "hartmann3";
  config.evaluator.noise_std = 0.01;
  config.evaluator.fidelity_bias = 0.5;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("history replay reproduces the in-memory store", "[history]") {
  auto path = temp_path("mfes_hist_replay.jsonl");
  RunConfig config = small_run_config(78.0, 5);
  auto result = mfes::run_session(config, path);

  mfes::History history = mfes::load_history(path);
  CHECK_FALSE(history.truncated_tail);
  CHECK(history.meta.at("seed").get<std::uint64_t>() == 5);

  auto setup = mfes::make_session_setup(config);
  mfes::MeasurementStore rebuilt =
      mfes::rebuild_store(history, setup.space, 9.0, 3.0);
  CHECK(rebuilt == *result.outcome.store);
  std::filesystem::remove(path);
}

TEST_CASE("incumbent trajectory is the running minimum", "[history]") {
  // Synthetic history: top-fidelity losses 0.5, 0.3, 0.4 plus a
  // low-fidelity 0.01 that must not leak into the incumbent column.
  mfes::History history;
  auto add = [&](double t, double resource, double loss) {
    mfes::MeasurementRecord m;
    m.t = t;
    m.resource = resource;
    m.loss = loss;
    history.measurements.push_back(m);
  };
  add(1.0, 9.0, 0.5);
  add(2.0, 1.0, 0.01);
  add(3.0, 9.0, 0.3);
  add(4.0, 9.0, 0.4);
  auto rows = mfes::incumbent_trajectory(history, 9.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].best_loss == 0.5);
  CHECK(rows[1].best_loss == 0.3);
  CHECK(rows[2].best_loss == 0.3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].best_loss <= rows[i - 1].best_loss);
  }
}

TEST_CASE("export writes incumbent and weights tables", "[history]") {
  auto path = temp_path("mfes_hist_export.jsonl");
  auto out_dir = temp_path("mfes_export_dir");
  RunConfig config = small_run_config(78.0, 7);
  mfes::run_session(config, path);

  mfes::History history = mfes::load_history(path);
  auto [incumbent_path, weights_path] = mfes::export_history(
      history, 9.0, mfes::ExportFormat::Csv, out_dir, nullptr);

  auto incumbent_lines = read_lines(incumbent_path);
  REQUIRE(incumbent_lines.size() >= 2);  // header + rows
  CHECK(incumbent_lines.front() == "wall_clock_seconds,best_loss");

  auto weight_lines = read_lines(weights_path);
  // One row per ensemble build plus the header.
  CHECK(weight_lines.size() == history.ensemble_builds.size() + 1);

  std::filesystem::remove_all(out_dir);
  std::filesystem::remove(path);
}

TEST_CASE("export with no top-fidelity rows leaves the incumbent empty",
          "[history]") {
  auto path = temp_path("mfes_hist_lowonly.jsonl");
  // 9 units: only the first rung at level 1 runs.
  RunConfig config = small_run_config(0.5, 11);
  mfes::run_session(config, path);
  mfes::History history = mfes::load_history(path);
  std::ostringstream warnings;
  auto out_dir = temp_path("mfes_export_lowonly");
  auto [incumbent_path, weights_path] = mfes::export_history(
      history, 9.0, mfes::ExportFormat::Csv, out_dir, &warnings);
  CHECK(read_lines(incumbent_path).size() == 1);  // header only
  CHECK(read_lines(weights_path).size() >= 2);
  CHECK(warnings.str().find("no top-fidelity measurements") != std::string::npos);
  std::filesystem::remove_all(out_dir);
  std::filesystem::remove(path);
}

TEST_CASE("truncated final line is ignored with a warning", "[history]") {
  auto path = temp_path("mfes_hist_truncated.jsonl");
  RunConfig config = small_run_config(78.0, 13);
  mfes::run_session(config, path);
  auto lines = read_lines(path);
  std::size_t full_measurements = mfes::load_history(path, nullptr).measurements.size();

  lines.back() = lines.back().substr(0, lines.back().size() / 2);
  write_lines(path, lines);
  std::ostringstream warnings;
  mfes::History history = mfes::load_history(path, &warnings);
  CHECK(history.truncated_tail);
  CHECK(warnings.str().find("truncated") != std::string::npos);
  CHECK(history.measurements.size() >= full_measurements - 1);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt interior lines are hard errors", "[history]") {
  auto path = temp_path("mfes_hist_corrupt.jsonl");
  RunConfig config = small_run_config(78.0, 17);
  mfes::run_session(config, path);
  auto lines = read_lines(path);
  REQUIRE(lines.size() > 4);
  lines[2] = "{\"kind\": \"measurement\", broken";
  write_lines(path, lines);
  CHECK_THROWS_AS(mfes::load_history(path, nullptr), mfes::HistoryError);
  try {
    mfes::load_history(path, nullptr);
  } catch (const mfes::HistoryError& e) {
    CHECK(e.line() == 3);
  }
  std::filesystem::remove(path);
}

TEST_CASE("empty history is rejected", "[history]") {
  auto path = temp_path("mfes_hist_empty.jsonl");
  std::ofstream(path).close();
  CHECK_THROWS_AS(mfes::load_history(path, nullptr), mfes::HistoryError);
  std::filesystem::remove(path);
}

TEST_CASE("history without a leading run_meta is rejected", "[history]") {
  auto path = temp_path("mfes_hist_nometa.jsonl");
  write_lines(path, {R"({"kind": "bracket_start", "t": 0.0, "iteration": 0, )"
                     R"("s": 2, "n1": 9, "r1": 1.0})"});
  CHECK_THROWS_AS(mfes::load_history(path, nullptr), mfes::HistoryError);
  std::filesystem::remove(path);
}

TEST_CASE("kill and resume lands within one bracket of the full run",
          "[history]") {
  // Reference: uninterrupted run over one full HB iteration.
  auto full_path = temp_path("mfes_hist_full.jsonl");
  RunConfig config = small_run_config(78.0, 19);
  mfes::run_session(config, full_path);
  mfes::History full = mfes::load_history(full_path);

  // Simulate a kill partway through the second bracket: keep the prefix
  // of whole records (per-record flushing guarantees exactly this shape).
  auto killed_path = temp_path("mfes_hist_killed.jsonl");
  auto lines = read_lines(full_path);
  std::size_t cut = 0;
  int brackets_seen = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find("\"bracket_start\"") != std::string::npos) ++brackets_seen;
    if (brackets_seen == 2 && lines[i].find("\"measurement\"") != std::string::npos) {
      cut = i + 2;  // a couple of records into bracket 2
      break;
    }
  }
  REQUIRE(cut > 0);
  write_lines(killed_path, std::vector<std::string>(lines.begin(),
                                                    lines.begin() + cut));

  auto resumed = mfes::resume_session(killed_path, nullptr);
  CHECK_FALSE(resumed.resumed_nothing);
  mfes::History after = mfes::load_history(killed_path);

  // Within one bracket's worth of measurements of the uninterrupted run
  // (the killed bracket is redone from the next bracket boundary).
  long full_count = static_cast<long>(full.measurements.size());
  long resumed_count = static_cast<long>(after.measurements.size());
  long bracket_worth = 13;  // largest bracket at R=9 evaluates 13 times
  CHECK(std::abs(full_count - resumed_count) <= bracket_worth);

  // The resumed session appended a second run_meta.
  CHECK(after.session_starts.size() == 2);
  std::filesystem::remove(full_path);
  std::filesystem::remove(killed_path);
}

TEST_CASE("resume of a completed run does nothing", "[history]") {
  auto path = temp_path("mfes_hist_done.jsonl");
  RunConfig config = small_run_config(78.0, 23);
  mfes::run_session(config, path);
  auto before = read_lines(path);
  auto resumed = mfes::resume_session(path, nullptr);
  CHECK(resumed.resumed_nothing);
  CHECK(read_lines(path) == before);
  CHECK(resumed.outcome.best_config.has_value());
  std::filesystem::remove(path);
}
