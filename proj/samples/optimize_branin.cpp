// Minimal library usage: optimize the Branin benchmark with MFES-HB and
// print the incumbent. Equivalent to `mfes-hb run` with a small config.

#include <iostream>

#include "mfes/benchmarks.hpp"
#include "mfes/hyperband.hpp"

int main() {
  std::shared_ptr<const mfes::Benchmark> benchmark =
      mfes::make_benchmark({"branin", 0, /*noise_std=*/0.01, /*fidelity_bias=*/0.5});

  mfes::DriverConfig config{
      benchmark->space(),
      {/*max_resource=*/27.0, /*eta=*/3.0, /*total_budget=*/500.0,
       mfes::BudgetType::ResourceUnits},
      {/*rho=*/0.2, /*n_candidates=*/1000},
      {},
      {},
      /*workers=*/1,
      /*seed=*/7};

  mfes::SyntheticEvaluator evaluator(benchmark, config.hb.max_resource, config.seed);
  mfes::RunOutcome outcome = mfes::run_mfes_hb(config, evaluator);

  std::cout << "best loss " << outcome.best_loss << " after "
            << outcome.evaluations << " evaluations (optimum "
            << benchmark->optimum() << ")\n";
  for (const auto& [name, value] : outcome.best_config->values()) {
    std::cout << "  " << name << " = " << std::get<double>(value) << "\n";
  }
  return 0;
}
