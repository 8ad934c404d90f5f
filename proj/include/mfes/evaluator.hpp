#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mfes/config_space.hpp"
#include "mfes/errors.hpp"

namespace mfes {

struct EvaluationRequest {
  Configuration config;
  double resource = 0.0;
  std::string request_id;
};

struct EvaluationResult {
  std::string request_id;
  std::optional<double> loss;  // empty marks a failed evaluation
  double duration_seconds = 0.0;
  bool timed_out = false;
  std::string error;

  bool failed() const { return !loss.has_value(); }
};

/// The evaluation boundary. Implementations must either be safe to call
/// from several workers at once or declare themselves serial-only.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvaluationResult evaluate(const EvaluationRequest& request) = 0;
  virtual bool serial_only() const { return false; }
};

/// Runs all requests on a bounded worker pool. Results land at the index
/// of their request; a failure (exception, non-finite loss) becomes a
/// failure marker and never disturbs sibling evaluations.
inline std::vector<EvaluationResult> evaluate_batch(
    Evaluator& evaluator, const std::vector<EvaluationRequest>& requests,
    int workers) {
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (evaluator.serial_only()) workers = 1;

  std::vector<EvaluationResult> results(requests.size());
  auto run_one = [&](std::size_t i) {
    auto start = std::chrono::steady_clock::now();
    EvaluationResult result;
    try {
      result = evaluator.evaluate(requests[i]);
      if (result.loss.has_value() && !std::isfinite(*result.loss)) {
        result.loss.reset();
        result.error = "evaluator returned a non-finite loss";
      }
    } catch (const std::exception& e) {
      result.loss.reset();
      result.error = e.what();
    } catch (...) {
      result.loss.reset();
      result.error = "unknown evaluator failure";
    }
    result.request_id = requests[i].request_id;
    if (result.duration_seconds == 0.0) {
      result.duration_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();
    }
    results[i] = std::move(result);
  };

  std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(workers),
                                           requests.size());
  if (pool <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) run_one(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t t = 0; t < pool; ++t) {
    threads.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= requests.size()) break;
        run_one(i);
      }
    });
  }
  for (auto& t : threads) t.join();
  return results;
}

}  // namespace mfes
