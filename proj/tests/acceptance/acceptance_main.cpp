// Acceptance suite: one self-contained check per criterion, each printing
// a single [PASS]/[FAIL] line. Run with no arguments for all criteria or
// pass criterion numbers to select.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfes/acquisition.hpp"
#include "mfes/benchmarks.hpp"
#include "mfes/ensemble.hpp"
#include "mfes/history.hpp"
#include "mfes/hyperband.hpp"
#include "mfes/runner.hpp"
#include "mfes/subprocess.hpp"

#include "../test_util.hpp"

namespace {

using mfes::BudgetType;
using mfes::Configuration;
using mfes::RandomSource;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct CheckList {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& label) {
    if (!condition) {
      ok = false;
      detail << "  failed: " << label << "\n";
    }
  }
};

// ---------------------------------------------------------------------
// Criterion 1: bracket schedules match the published grids exactly.
bool criterion1() {
  CheckList checks;
  auto start = std::chrono::steady_clock::now();

  auto plans81 = mfes::bracket_schedule({81.0, 3.0, 1.0, BudgetType::ResourceUnits});
  checks.require(plans81.size() == 5, "R=81 has 5 brackets");
  const auto& s4 = plans81[0];
  checks.require(s4.s == 4 && s4.n1 == 81 && s4.r1 == 1.0, "s=4 starts 81 @ 1");
  std::vector<int> ns;
  std::vector<double> rs;
  for (const auto& rung : s4.rungs) {
    ns.push_back(rung.n);
    rs.push_back(rung.resource);
  }
  checks.require(ns == std::vector<int>{81, 27, 9, 3, 1}, "s=4 rung counts");
  checks.require(rs == std::vector<double>{1.0, 3.0, 9.0, 27.0, 81.0},
                 "s=4 rung resources");

  auto plans9 = mfes::bracket_schedule({9.0, 3.0, 1.0, BudgetType::ResourceUnits});
  const auto& s2 = plans9[0];
  checks.require(s2.s == 2 && s2.n1 == 9, "R=9 s=2 starts with 9 configurations");
  checks.require(s2.rungs.size() == 3, "R=9 s=2 has 3 rungs");
  checks.require(s2.rungs[0].n == 9 && s2.rungs[0].resource == 1.0, "rung 9 @ 1");
  checks.require(s2.rungs[1].n == 3 && s2.rungs[1].resource == 3.0, "rung 3 @ 3");
  checks.require(s2.rungs[2].n == 1 && s2.rungs[2].resource == 9.0, "rung 1 @ 9");

  double elapsed = seconds_since(start);
  checks.require(elapsed < 1e-3, "schedule computation under 1 ms");
  checks.detail << "  schedules exact, computed in " << elapsed * 1e6 << " us\n";
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Criterion 2: formula oracles for gPoE, EI, ranking loss, weights.
bool criterion2() {
  CheckList checks;
  auto start = std::chrono::steady_clock::now();

  // gPoE identities at 1e-12.
  mfes::Prediction single = mfes::gpoe_predict({{1.3, 0.7}}, {1.0});
  checks.require(std::abs(single.mean - 1.3) < 1e-12 &&
                     std::abs(single.variance - 0.7) < 1e-12,
                 "gPoE single-base identity");
  mfes::Prediction excluded =
      mfes::gpoe_predict({{1.3, 0.7}, {1e9, 1e-12}}, {1.0, 0.0});
  checks.require(std::abs(excluded.mean - 1.3) < 1e-12 &&
                     std::abs(excluded.variance - 0.7) < 1e-12,
                 "gPoE zero-weight exclusion");
  RandomSource rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t k = 1 + rng.index(5);
    std::vector<mfes::Prediction> preds(k);
    std::vector<double> w(k);
    double total = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      preds[i] = {rng.uniform(-2.0, 2.0), 0.6};
      w[i] = rng.uniform01() + 1e-3;
      total += w[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      w[i] /= total;
      expected += w[i] * preds[i].mean;
    }
    mfes::Prediction fused = mfes::gpoe_predict(preds, w);
    checks.require(std::abs(fused.mean - expected) < 1e-12,
                   "gPoE equal-variance convex combination");
  }

  // Closed-form EI against quadrature at 1e-6 on 100 random triples.
  for (int trial = 0; trial < 100; ++trial) {
    double mu = rng.uniform(-3.0, 3.0);
    double sigma = rng.uniform(0.05, 2.0);
    double y_star = rng.uniform(-3.0, 3.0);
    double closed = mfes::expected_improvement({mu, sigma * sigma}, y_star);
    double numeric = testutil::ei_by_quadrature(mu, sigma, y_star, 200000);
    if (std::abs(closed - numeric) >= 1e-6) {
      checks.require(false, "EI closed form vs quadrature");
      break;
    }
  }

  // Ranking loss vs brute force on 1000 random instances, exact.
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 2 + rng.index(29);
    std::vector<double> mu(n), y(n);
    bool ties = trial % 3 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] = ties ? static_cast<double>(rng.index(4)) : rng.uniform01();
      y[i] = ties ? static_cast<double>(rng.index(4)) : rng.uniform01();
    }
    if (mfes::misranked_pairs(mu, y) != testutil::brute_force_misranked(mu, y)) {
      checks.require(false, "ranking loss equals brute force");
      break;
    }
  }

  // Weight discrimination operator.
  auto w = mfes::weights_from_fractions({0.5, 1.0}, 3);
  checks.require(std::abs(w[0] - 1.0 / 9.0) < 1e-12 &&
                     std::abs(w[1] - 8.0 / 9.0) < 1e-12,
                 "weight operator (1/9, 8/9)");

  double elapsed = seconds_since(start);
  checks.require(elapsed < 10.0, "oracle suite under 10 s");
  checks.detail << "  formula oracles hold, " << elapsed << " s\n";
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Shared machinery for the end-to-end criteria.

struct RunTrace {
  std::vector<mfes::EnsembleBuildEvent> builds;
  // (consumed units, observed loss) for top-fidelity measurements.
  std::vector<std::pair<double, double>> top_measurements;
};

class TraceObserver : public mfes::RunObserver {
 public:
  TraceObserver(RunTrace& trace, double top_level)
      : trace_(trace), top_level_(top_level) {}

  void on_measurement(const mfes::MeasurementEvent& event) override {
    if (event.loss.has_value() && event.resource == top_level_) {
      trace_.top_measurements.emplace_back(event.t, *event.loss);
    }
  }

  void on_ensemble_build(const mfes::EnsembleBuildEvent& event) override {
    trace_.builds.push_back(event);
  }

 private:
  RunTrace& trace_;
  double top_level_;
};

RunTrace run_benchmark_arm(const std::string& benchmark_name, double noise_std,
                           double fidelity_bias, double max_resource,
                           double budget_units, std::uint64_t seed, double rho,
                           mfes::WeightMode mode, int k_full_threshold = 50) {
  std::shared_ptr<const mfes::Benchmark> benchmark =
      mfes::make_benchmark({benchmark_name, 0, noise_std, fidelity_bias});
  mfes::DriverConfig config{
      benchmark->space(),
      {max_resource, 3.0, budget_units, BudgetType::ResourceUnits},
      {rho, 5000},  // stock sampler settings
      {},
      {3, k_full_threshold, mode},
      1,
      seed};
  mfes::SyntheticEvaluator evaluator(benchmark, max_resource, seed);
  RunTrace trace;
  TraceObserver observer(trace, max_resource);
  mfes::run_mfes_hb(config, evaluator, &observer);
  return trace;
}

double incumbent_at(const std::vector<std::pair<double, double>>& measurements,
                    double units) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [t, loss] : measurements) {
    if (t <= units) best = std::min(best, loss);
  }
  return best;
}

// ---------------------------------------------------------------------
// Criterion 3: weight simplex and the w_K = 1 safeguard end to end.
bool criterion3() {
  CheckList checks;
  // One full HB iteration at R=27 costs 423 units and rebuilds the
  // ensemble after each of the 4 brackets.
  RunTrace trace = run_benchmark_arm("hartmann3", 0.01, 1.0, 27.0, 423.0, 11, 0.2,
                                     mfes::WeightMode::Ranking);
  checks.require(trace.builds.size() >= 3, "at least 3 ensemble builds");
  for (const auto& build : trace.builds) {
    double total = 0.0;
    for (double w : build.weights) {
      checks.require(w >= 0.0 && w <= 1.0, "weight inside [0, 1]");
      total += w;
    }
    checks.require(std::abs(total - 1.0) <= 1e-9, "weights sum to 1 within 1e-9");
  }

  // Force the safeguard with a small threshold: once the top group holds
  // at least 3 points, all weight must sit on the top surrogate.
  RunTrace forced = run_benchmark_arm("hartmann3", 0.01, 1.0, 27.0, 423.0, 13, 0.2,
                                      mfes::WeightMode::Ranking,
                                      /*k_full_threshold=*/3);
  bool fired = false;
  for (const auto& build : forced.builds) {
    if (build.counts.back() >= 3) {
      fired = true;
      checks.require(build.weights.back() == 1.0, "w_K = 1 once N_K >= threshold");
      for (std::size_t i = 0; i + 1 < build.weights.size(); ++i) {
        checks.require(build.weights[i] == 0.0, "other weights zero under safeguard");
      }
    }
  }
  checks.require(fired, "safeguard threshold reached during the run");
  checks.detail << "  " << trace.builds.size() << " builds on the simplex; "
                << "safeguard verified\n";
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Criterion 4: Spearman correlation with the top fidelity is
// non-decreasing in the resource level.
bool criterion4() {
  CheckList checks;
  for (const std::string name : {"branin", "hartmann3", "hartmann6"}) {
    auto benchmark = mfes::make_benchmark({name, 0, 0.0, 1.0});
    std::vector<double> levels{1.0, 3.0, 9.0, 27.0};
    std::vector<std::vector<double>> correlations(levels.size());
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RandomSource rng(9000 + seed);
      std::vector<Configuration> configs;
      for (int i = 0; i < 200; ++i) {
        configs.push_back(benchmark->space().sample_uniform(rng));
      }
      std::vector<double> at_full;
      for (const auto& c : configs) {
        at_full.push_back(benchmark->loss(c, 27.0, 27.0, seed));
      }
      for (std::size_t li = 0; li < levels.size(); ++li) {
        std::vector<double> at_level;
        for (const auto& c : configs) {
          at_level.push_back(benchmark->loss(c, levels[li], 27.0, seed));
        }
        correlations[li].push_back(testutil::spearman(at_level, at_full));
      }
    }
    double previous = -2.0;
    checks.detail << "  " << name << " medians:";
    for (std::size_t li = 0; li < levels.size(); ++li) {
      double med = testutil::median(correlations[li]);
      checks.detail << " r=" << levels[li] << ":" << med;
      checks.require(med >= previous - 1e-12,
                     name + " correlation non-decreasing in r");
      previous = med;
    }
    checks.detail << "\n";
  }
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Criteria 5 and 6 share the Hartmann-6D arena: R=27, eta=3, three full
// HB iterations (3 * 423 = 1269 resource units), 20 seeds.
constexpr double kArenaBudget = 1269.0;
constexpr int kArenaSeeds = 20;

std::vector<RunTrace> run_arena(double rho, mfes::WeightMode mode) {
  std::vector<RunTrace> traces;
  traces.reserve(kArenaSeeds);
  for (int seed = 0; seed < kArenaSeeds; ++seed) {
    traces.push_back(run_benchmark_arm("hartmann6", 0.01, 0.5, 27.0, kArenaBudget,
                                       static_cast<std::uint64_t>(seed), rho, mode));
  }
  return traces;
}

std::vector<double> final_regrets(const std::vector<RunTrace>& traces,
                                  double optimum) {
  std::vector<double> regrets;
  for (const auto& trace : traces) {
    regrets.push_back(incumbent_at(trace.top_measurements, kArenaBudget) - optimum);
  }
  return regrets;
}

bool criterion5() {
  CheckList checks;
  auto start = std::chrono::steady_clock::now();
  double optimum = mfes::make_benchmark({"hartmann6", 0, 0.0, 0.0})->optimum();

  auto mfes_traces = run_arena(0.2, mfes::WeightMode::Ranking);
  auto hb_traces = run_arena(1.0, mfes::WeightMode::Ranking);  // plain Hyperband

  double mfes_final = testutil::median(final_regrets(mfes_traces, optimum));
  double hb_final = testutil::median(final_regrets(hb_traces, optimum));
  checks.require(mfes_final <= hb_final,
                 "median final regret of MFES-HB <= plain-HB ablation");

  // Earliest budget at which the MFES-HB median regret reaches the
  // plain-HB final median.
  std::vector<double> grid;
  for (const auto& trace : mfes_traces) {
    for (const auto& [t, loss] : trace.top_measurements) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double reach = std::numeric_limits<double>::infinity();
  for (double u : grid) {
    std::vector<double> regrets;
    for (const auto& trace : mfes_traces) {
      regrets.push_back(incumbent_at(trace.top_measurements, u) - optimum);
    }
    if (testutil::median(regrets) <= hb_final) {
      reach = u;
      break;
    }
  }
  checks.require(reach <= 0.6 * kArenaBudget,
                 "MFES-HB matches the plain-HB final regret within 60% of its "
                 "resource units");

  double elapsed = seconds_since(start);
  checks.require(elapsed < 600.0, "criterion runtime under 10 minutes");
  checks.detail << "  median final regret: mfes-hb " << mfes_final << ", plain hb "
                << hb_final << "; reached hb-final at " << reach << " / "
                << kArenaBudget << " units (" << elapsed << " s)\n";
  std::cout << checks.detail.str();
  return checks.ok;
}

bool criterion6() {
  CheckList checks;
  double optimum = mfes::make_benchmark({"hartmann6", 0, 0.0, 0.0})->optimum();

  auto full = final_regrets(run_arena(0.2, mfes::WeightMode::Ranking), optimum);
  std::map<std::string, std::vector<double>> ablations;
  ablations["equal-weight"] =
      final_regrets(run_arena(0.2, mfes::WeightMode::Equal), optimum);
  ablations["single-best"] =
      final_regrets(run_arena(0.2, mfes::WeightMode::SingleBest), optimum);
  ablations["top-fidelity-only"] =
      final_regrets(run_arena(0.2, mfes::WeightMode::TopFidelityOnly), optimum);

  double full_median = testutil::median(full);
  for (const auto& [name, regrets] : ablations) {
    double ablation_median = testutil::median(regrets);
    checks.require(full_median <= ablation_median,
                   "median final regret: full MFES <= " + name);
    int worse = 0, ties_dropped = 0;
    for (int i = 0; i < kArenaSeeds; ++i) {
      if (full[i] > regrets[i]) ++worse;
      if (full[i] == regrets[i]) ++ties_dropped;
    }
    int trials = kArenaSeeds - ties_dropped;
    double p = trials > 0 ? testutil::sign_test_p_value(worse, trials) : 1.0;
    checks.require(p > 0.05, "sign test: full MFES not worse than " + name);
    checks.detail << "  vs " << name << ": median " << full_median << " vs "
                  << ablation_median << ", worse on " << worse << "/" << trials
                  << " seeds, p=" << p << "\n";
  }
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Criterion 7: the rho safeguard holds empirically.
bool criterion7() {
  CheckList checks;
  auto space = mfes::ConfigurationSpace(
      {mfes::ParameterSpec::continuous("x", 0.0, 1.0)});
  RandomSource data_rng(3);
  mfes::FidelityGroup top(9.0);
  for (int i = 0; i < 30; ++i) {
    double x = data_rng.uniform01();
    top.add(space.make_configuration({{"x", x}}), std::sin(6.0 * x));
  }
  std::vector<const mfes::FidelityGroup*> groups{&top};
  RandomSource fit_rng(5);
  auto ensemble = mfes::build_ensemble(space, groups, mfes::ForestParams{},
                                       mfes::EnsembleParams{}, fit_rng);
  checks.require(ensemble.has_value(), "fixed ensemble available");

  mfes::SamplerParams params;
  params.rho = 0.2;
  params.n_candidates = 5;
  RandomSource rng(7);
  int random_draws = 0;
  const int calls = 10000;
  for (int i = 0; i < calls; ++i) {
    auto result = mfes::sample_next(space, &*ensemble, params, -1.0, rng);
    if (result.source == mfes::SampleSource::Random) ++random_draws;
  }
  double fraction = static_cast<double>(random_draws) / calls;
  checks.require(fraction >= 0.18 && fraction <= 0.22,
                 "empirical random fraction in [0.18, 0.22]");
  checks.detail << "  random fraction " << fraction << " over " << calls
                << " calls\n";
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Criterion 8: byte-identical histories and kill/resume recovery.
bool criterion8() {
  CheckList checks;
  auto tmp = std::filesystem::temp_directory_path();

  mfes::RunConfig config;
  config.hb = {9.0, 3.0, 78.0, BudgetType::ResourceUnits};
  config.sampler = {0.2, 100};
  config.evaluator.builtin = "hartmann3";
  config.evaluator.noise_std = 0.01;
  config.evaluator.fidelity_bias = 0.5;
  config.seed = 41;

  auto read_file = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };

  auto path_a = tmp / "mfes_acc_det_a.jsonl";
  auto path_b = tmp / "mfes_acc_det_b.jsonl";
  mfes::run_session(config, path_a);
  mfes::run_session(config, path_b);
  std::string bytes_a = read_file(path_a);
  checks.require(!bytes_a.empty(), "history written");
  checks.require(bytes_a == read_file(path_b),
                 "identical seed + serial executor give byte-identical histories");

  // Kill/resume: truncate mid-bracket and resume.
  auto killed = tmp / "mfes_acc_killed.jsonl";
  {
    std::ifstream in(path_a);
    std::ofstream out(killed, std::ios::trunc);
    std::string line;
    int brackets = 0, kept_after = 0;
    while (std::getline(in, line)) {
      if (line.find("\"bracket_start\"") != std::string::npos) ++brackets;
      if (brackets == 2) ++kept_after;
      out << line << '\n';
      if (kept_after == 3) break;
    }
  }
  mfes::resume_session(killed, nullptr);
  auto full_history = mfes::load_history(path_a, nullptr);
  auto resumed_history = mfes::load_history(killed, nullptr);
  long difference =
      std::labs(static_cast<long>(full_history.measurements.size()) -
                static_cast<long>(resumed_history.measurements.size()));
  checks.require(difference <= 13,
                 "kill/resume measurement count within one bracket of the "
                 "uninterrupted run");
  checks.detail << "  " << full_history.measurements.size()
                << " measurements uninterrupted, "
                << resumed_history.measurements.size() << " after kill+resume\n";

  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
  std::filesystem::remove(killed);
  std::cout << checks.detail.str();
  return checks.ok;
}

// ---------------------------------------------------------------------
// Criterion 9: subprocess protocol round trip and failure isolation.
bool criterion9() {
  CheckList checks;
  auto tmp = std::filesystem::temp_directory_path();
  auto write_script = [&](const std::string& name, const std::string& body) {
    auto path = tmp / name;
    std::ofstream out(path);
    out << body;
    return "python3 " + path.string();
  };

  std::string identity = write_script("mfes_acc_identity.py",
                                      R"(import json, sys
req = json.load(sys.stdin)
print(json.dumps({"request_id": req["request_id"], "loss": req["config"]["x"]}))
)");
  std::string failing = write_script("mfes_acc_fail.py",
                                     R"(import sys
sys.stderr.write("nope\n")
sys.exit(2)
)");
  std::string sleepy = write_script("mfes_acc_sleep.py",
                                    R"(import json, sys, time
time.sleep(30)
)");

  mfes::ConfigurationSpace space(
      {mfes::ParameterSpec::continuous("x", 0.0, 1.0)});
  double awkward = 0.1 + 0.2;  // not exactly representable as 0.3
  mfes::EvaluationRequest request{space.make_configuration({{"x", awkward}}), 3.0,
                                  "acc-rt"};
  auto round_trip = mfes::subprocess_evaluate(identity, request, 20.0);
  checks.require(!round_trip.failed() && *round_trip.loss == awkward,
                 "identity evaluator round trip is bit-exact");

  // Mixed batch: failures and timeouts leave siblings untouched.
  class Mixed : public mfes::Evaluator {
   public:
    Mixed(std::string identity, std::string failing, std::string sleepy)
        : identity_(std::move(identity)),
          failing_(std::move(failing)),
          sleepy_(std::move(sleepy)) {}
    mfes::EvaluationResult evaluate(const mfes::EvaluationRequest& r) override {
      if (r.request_id == "acc-1") return mfes::subprocess_evaluate(failing_, r, 20.0);
      if (r.request_id == "acc-2") return mfes::subprocess_evaluate(sleepy_, r, 1.0);
      return mfes::subprocess_evaluate(identity_, r, 20.0);
    }

   private:
    std::string identity_, failing_, sleepy_;
  };
  Mixed evaluator(identity, failing, sleepy);
  std::vector<mfes::EvaluationRequest> requests;
  for (int i = 0; i < 5; ++i) {
    requests.push_back({space.make_configuration({{"x", 0.1 * (i + 1)}}), 3.0,
                        "acc-" + std::to_string(i)});
  }
  auto results = mfes::evaluate_batch(evaluator, requests, 3);
  checks.require(results[1].failed() && !results[1].timed_out,
                 "nonzero exit becomes a failure marker");
  checks.require(results[1].error.find("nope") != std::string::npos,
                 "stderr captured for the failed evaluator");
  checks.require(results[2].failed() && results[2].timed_out,
                 "timeout becomes a flagged failure marker");
  for (int i : {0, 3, 4}) {
    checks.require(!results[i].failed() &&
                       *results[i].loss == 0.1 * (i + 1),
                   "sibling evaluation " + std::to_string(i) + " unaffected");
  }
  checks.detail << "  protocol round trip exact; failure and timeout isolated\n";
  std::cout << checks.detail.str();
  return checks.ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::map<int, std::function<bool()>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},
      {4, criterion4}, {5, criterion5}, {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}};
  static const std::map<int, std::string> names = {
      {1, "bracket schedule matches the published grids"},
      {2, "formula oracles (gPoE, EI, ranking loss, weights)"},
      {3, "weight simplex and w_K=1 safeguard end to end"},
      {4, "fidelity information ordering"},
      {5, "desk-scale speedup over the plain-Hyperband ablation"},
      {6, "ablation ordering (gPoE + ranking weights wins)"},
      {7, "rho-fraction random safeguard"},
      {8, "determinism and resume"},
      {9, "subprocess evaluator protocol"}};

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [number, fn] : criteria) selected.push_back(number);
  }

  int failures = 0;
  for (int number : selected) {
    auto it = criteria.find(number);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << number << "\n";
      return 64;
    }
    bool ok = it->second();
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": "
              << names.at(number) << "\n";
    if (!ok) ++failures;
  }
  return failures;
}
