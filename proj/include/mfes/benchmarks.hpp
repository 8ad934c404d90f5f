#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mfes/config_space.hpp"
#include "mfes/errors.hpp"
#include "mfes/evaluator.hpp"
#include "mfes/random.hpp"

namespace mfes {

/// Built-in synthetic multi-fidelity benchmark selection.
struct BenchmarkSpec {
  std::string name;
  std::size_t dimension = 0;   // only meaningful for counting-ones
  double noise_std = 0.0;      // sigma of additive Gaussian observation noise
  double fidelity_bias = 0.0;  // scale of the low-fidelity distortion
};

/// A synthetic objective with a known optimum. The observed loss is
///   f_true(x) + fidelity_bias * (1 - r/R) * b(x) + noise
/// where b is a fixed low-frequency sinusoid of the encoded vector. At
/// full resource the bias term is exactly zero.
class Benchmark {
 public:
  Benchmark(BenchmarkSpec spec, ConfigurationSpace space, double optimum)
      : spec_(std::move(spec)), space_(std::move(space)), optimum_(optimum) {
    // Distortion direction is a fixed function of the benchmark name so
    // that every run sees the same low-fidelity landscape.
    RandomSource rng(fnv1a64(spec_.name.data(), spec_.name.size()));
    frequencies_.reserve(space_.encoded_width());
    for (std::size_t i = 0; i < space_.encoded_width(); ++i) {
      frequencies_.push_back(rng.uniform(1.0, 3.0));
    }
    phase_ = rng.uniform(0.0, 2.0 * RandomSource::pi());
  }

  virtual ~Benchmark() = default;

  const BenchmarkSpec& spec() const { return spec_; }
  const ConfigurationSpace& space() const { return space_; }
  double optimum() const { return optimum_; }

  virtual double true_value(const Configuration& config) const = 0;

  /// Smooth unit-scale distortion of the encoded configuration.
  double distortion(const Configuration& config) const {
    std::vector<double> z = space_.encode(config);
    double arg = phase_;
    for (std::size_t i = 0; i < z.size(); ++i) arg += frequencies_[i] * z[i];
    return std::sin(arg);
  }

  /// Observed loss at the given resource. Deterministic for a fixed
  /// (config, resource, noise_seed) triple regardless of evaluation order.
  double loss(const Configuration& config, double resource, double max_resource,
              std::uint64_t noise_seed) const {
    double value = true_value(config);
    double bias_factor = 1.0 - resource / max_resource;
    if (bias_factor != 0.0 && spec_.fidelity_bias != 0.0) {
      value += spec_.fidelity_bias * bias_factor * distortion(config);
    }
    if (spec_.noise_std > 0.0) {
      std::uint64_t h = fnv1a64(config.id(), noise_seed);
      h = fnv1a64(resource, h);
      RandomSource noise(h);
      value += spec_.noise_std * noise.normal();
    }
    return value;
  }

 private:
  BenchmarkSpec spec_;
  ConfigurationSpace space_;
  double optimum_;
  std::vector<double> frequencies_;
  double phase_ = 0.0;
};

namespace detail {

class BraninBenchmark final : public Benchmark {
 public:
  explicit BraninBenchmark(BenchmarkSpec spec)
      : Benchmark(std::move(spec),
                  ConfigurationSpace({
                      ParameterSpec::continuous("x1", -5.0, 10.0),
                      ParameterSpec::continuous("x2", 0.0, 15.0),
                  }),
                  0.39788735772973816) {}

  double true_value(const Configuration& config) const override {
    double x1 = config.value_as_double("x1");
    double x2 = config.value_as_double("x2");
    double pi = RandomSource::pi();
    double b = 5.1 / (4.0 * pi * pi);
    double c = 5.0 / pi;
    double t = 1.0 / (8.0 * pi);
    double term = x2 - b * x1 * x1 + c * x1 - 6.0;
    return term * term + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
  }
};

class HartmannBenchmark final : public Benchmark {
 public:
  HartmannBenchmark(BenchmarkSpec spec, std::size_t dims)
      : Benchmark(std::move(spec), make_space(dims),
                  dims == 3 ? -3.8627821478207558 : -3.322368011391339),
        dims_(dims) {}

  double true_value(const Configuration& config) const override {
    static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    static const double a3[4][3] = {{3.0, 10.0, 30.0},
                                    {0.1, 10.0, 35.0},
                                    {3.0, 10.0, 30.0},
                                    {0.1, 10.0, 35.0}};
    static const double p3[4][3] = {{0.3689, 0.1170, 0.2673},
                                    {0.4699, 0.4387, 0.7470},
                                    {0.1091, 0.8732, 0.5547},
                                    {0.0381, 0.5743, 0.8828}};
    static const double a6[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
    static const double p6[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
    double x[6];
    for (std::size_t d = 0; d < dims_; ++d) {
      x[d] = config.value_as_double("x" + std::to_string(d + 1));
    }
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
      double inner = 0.0;
      for (std::size_t d = 0; d < dims_; ++d) {
        double a = dims_ == 3 ? a3[i][d] : a6[i][d];
        double p = dims_ == 3 ? p3[i][d] : p6[i][d];
        inner += a * (x[d] - p) * (x[d] - p);
      }
      total += alpha[i] * std::exp(-inner);
    }
    return -total;
  }

 private:
  static ConfigurationSpace make_space(std::size_t dims) {
    std::vector<ParameterSpec> params;
    for (std::size_t d = 0; d < dims; ++d) {
      params.push_back(ParameterSpec::continuous("x" + std::to_string(d + 1), 0.0, 1.0));
    }
    return ConfigurationSpace(std::move(params));
  }

  std::size_t dims_;
};

/// Categorical test space: loss is the fraction of parameters not set to
/// "1", minimized (at 0) by the all-ones configuration.
class CountingOnesBenchmark final : public Benchmark {
 public:
  CountingOnesBenchmark(BenchmarkSpec spec, std::size_t dims)
      : Benchmark(std::move(spec), make_space(dims), 0.0), dims_(dims) {}

  double true_value(const Configuration& config) const override {
    std::size_t ones = 0;
    for (std::size_t d = 0; d < dims_; ++d) {
      if (std::get<std::string>(config.at("c" + std::to_string(d + 1))) == "1") {
        ++ones;
      }
    }
    return static_cast<double>(dims_ - ones) / static_cast<double>(dims_);
  }

 private:
  static ConfigurationSpace make_space(std::size_t dims) {
    std::vector<ParameterSpec> params;
    for (std::size_t d = 0; d < dims; ++d) {
      params.push_back(ParameterSpec::categorical("c" + std::to_string(d + 1),
                                                  {"0", "1"}));
    }
    return ConfigurationSpace(std::move(params));
  }

  std::size_t dims_;
};

}  // namespace detail

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {"branin", "hartmann3",
                                                 "hartmann6", "counting-ones"};
  return names;
}

/// Builds a benchmark by name; dimension applies to counting-ones only
/// (default 8).
inline std::unique_ptr<Benchmark> make_benchmark(BenchmarkSpec spec) {
  if (spec.noise_std < 0.0) throw ConfigError("noise_std must be non-negative");
  if (spec.name == "branin") {
    return std::make_unique<detail::BraninBenchmark>(std::move(spec));
  }
  if (spec.name == "hartmann3") {
    return std::make_unique<detail::HartmannBenchmark>(std::move(spec), 3);
  }
  if (spec.name == "hartmann6") {
    return std::make_unique<detail::HartmannBenchmark>(std::move(spec), 6);
  }
  if (spec.name == "counting-ones") {
    std::size_t dims = spec.dimension == 0 ? 8 : spec.dimension;
    if (dims < 1) throw ConfigError("counting-ones needs a positive dimension");
    return std::make_unique<detail::CountingOnesBenchmark>(std::move(spec), dims);
  }
  throw EvaluatorSetupError("unknown builtin benchmark '" + spec.name + "'");
}

/// Evaluator over a built-in benchmark. Stateless per call and safe for
/// concurrent workers.
class SyntheticEvaluator final : public Evaluator {
 public:
  SyntheticEvaluator(std::shared_ptr<const Benchmark> benchmark, double max_resource,
                     std::uint64_t noise_seed)
      : benchmark_(std::move(benchmark)),
        max_resource_(max_resource),
        noise_seed_(noise_seed) {}

  EvaluationResult evaluate(const EvaluationRequest& request) override {
    EvaluationResult result;
    result.request_id = request.request_id;
    result.loss =
        benchmark_->loss(request.config, request.resource, max_resource_, noise_seed_);
    return result;
  }

  const Benchmark& benchmark() const { return *benchmark_; }

 private:
  std::shared_ptr<const Benchmark> benchmark_;
  double max_resource_;
  std::uint64_t noise_seed_;
};

}  // namespace mfes
