#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "mfes/config_space.hpp"
#include "mfes/ensemble.hpp"
#include "mfes/errors.hpp"
#include "mfes/random.hpp"

namespace mfes {

struct SamplerParams {
  double rho = 0.2;          // fraction of configurations sampled at random
  int n_candidates = 5000;   // random candidates scored per model-based draw

  void validate() const {
    if (rho < 0.0 || rho > 1.0) throw ConfigError("rho must be in [0, 1]");
    if (n_candidates < 1) throw ConfigError("n_candidates must be positive");
  }
};

/// Expected improvement below the incumbent y_star for a Gaussian
/// prediction, via the closed form (y*-mu)*Phi(z) + sigma*phi(z) with
/// z = (y*-mu)/sigma. Degenerates to max(y*-mu, 0) at zero variance.
inline double expected_improvement(const Prediction& pred, double y_star) {
  double sigma = std::sqrt(pred.variance);
  double delta = y_star - pred.mean;
  if (sigma == 0.0) return std::max(delta, 0.0);
  double z = delta / sigma;
  double value = delta * normal_cdf(z) + sigma * normal_pdf(z);
  return std::max(value, 0.0);
}

enum class SampleSource { Random, Acquisition };

struct SampleResult {
  Configuration config;
  SampleSource source = SampleSource::Random;
  double ei = 0.0;  // acquisition value of the chosen candidate, 0 for random draws
};

/// One configuration proposal. A uniform draw with probability rho (or
/// whenever no ensemble exists yet); otherwise the EI arg-max over
/// n_candidates uniform candidates scored under the ensemble, ties going
/// to the earliest draw.
inline SampleResult sample_next(const ConfigurationSpace& space,
                                const EnsembleSurrogate* ensemble,
                                const SamplerParams& params,
                                std::optional<double> y_star, RandomSource& rng) {
  params.validate();
  double coin = rng.uniform01();
  if (coin <= params.rho || ensemble == nullptr) {
    return {space.sample_uniform(rng), SampleSource::Random, 0.0};
  }
  if (!y_star.has_value()) {
    throw DomainError("sample_next needs y_star when an ensemble is available");
  }
  std::optional<Configuration> best;
  double best_ei = -1.0;
  for (int i = 0; i < params.n_candidates; ++i) {
    Configuration candidate = space.sample_uniform(rng);
    double ei = expected_improvement(ensemble->predict(space.encode(candidate)),
                                     *y_star);
    if (ei > best_ei) {
      best_ei = ei;
      best = std::move(candidate);
    }
  }
  return {std::move(*best), SampleSource::Acquisition, best_ei};
}

}  // namespace mfes
