#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "mfes/config_space.hpp"
#include "mfes/errors.hpp"
#include "mfes/random_forest.hpp"

namespace mfes {

/// One quality measurement: a configuration and its raw loss.
struct Measurement {
  Configuration config;
  double loss = 0.0;
};

/// All measurements taken at one resource level.
class FidelityGroup {
 public:
  explicit FidelityGroup(double resource_level) : resource_level_(resource_level) {}

  double resource_level() const { return resource_level_; }
  const std::vector<Measurement>& measurements() const { return measurements_; }
  std::size_t size() const { return measurements_.size(); }
  bool empty() const { return measurements_.empty(); }

  void add(Configuration config, double loss) {
    measurements_.push_back({std::move(config), loss});
    stats_dirty_ = true;
  }

  /// Population mean of the raw losses.
  double mean() const {
    refresh_stats();
    return mean_;
  }

  /// Population standard deviation of the raw losses.
  double std_dev() const {
    refresh_stats();
    return std_;
  }

  /// Standardized loss for y under this group's statistics; zero-variance
  /// groups map everything to 0.
  double standardize_value(double y) const {
    refresh_stats();
    return std_ > 0.0 ? (y - mean_) / std_ : 0.0;
  }

  bool operator==(const FidelityGroup& other) const {
    if (resource_level_ != other.resource_level_) return false;
    if (measurements_.size() != other.measurements_.size()) return false;
    for (std::size_t i = 0; i < measurements_.size(); ++i) {
      if (!(measurements_[i].config == other.measurements_[i].config) ||
          measurements_[i].loss != other.measurements_[i].loss) {
        return false;
      }
    }
    return true;
  }

 private:
  void refresh_stats() const {
    if (!stats_dirty_) return;
    stats_dirty_ = false;
    if (measurements_.empty()) {
      mean_ = 0.0;
      std_ = 0.0;
      return;
    }
    double sum = 0.0;
    for (const auto& m : measurements_) sum += m.loss;
    mean_ = sum / static_cast<double>(measurements_.size());
    double sq = 0.0;
    for (const auto& m : measurements_) sq += (m.loss - mean_) * (m.loss - mean_);
    std_ = std::sqrt(sq / static_cast<double>(measurements_.size()));
  }

  double resource_level_;
  std::vector<Measurement> measurements_;
  mutable bool stats_dirty_ = true;
  mutable double mean_ = 0.0;
  mutable double std_ = 0.0;
};

/// Encoded training set with targets standardized by the group's own
/// statistics (zero mean, unit variance; all zeros for a constant group).
inline std::vector<TrainingPoint> standardize(const ConfigurationSpace& space,
                                              const FidelityGroup& group) {
  if (group.empty()) {
    throw InsufficientDataError("cannot standardize an empty fidelity group");
  }
  std::vector<TrainingPoint> out;
  out.reserve(group.size());
  for (const auto& m : group.measurements()) {
    out.emplace_back(space.encode(m.config), group.standardize_value(m.loss));
  }
  return out;
}

/// Counts ordered pairs whose predicted order disagrees with the observed
/// order. Both orders of every pair are counted and comparisons are
/// strict, so ties contribute whenever exactly one side has a strict
/// inequality.
inline std::int64_t misranked_pairs(const std::vector<double>& mu,
                                    const std::vector<double>& y) {
  if (mu.size() != y.size()) {
    throw DomainError("misranked_pairs requires equal-length inputs");
  }
  std::int64_t count = 0;
  std::size_t n = mu.size();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if ((mu[j] < mu[k]) != (y[j] < y[k])) ++count;
    }
  }
  return count;
}

/// Ranking loss of a fitted surrogate against the measurements in d_k.
inline std::int64_t ranking_loss(const ForestSurrogate& surrogate,
                                 const ConfigurationSpace& space,
                                 const FidelityGroup& d_k) {
  if (d_k.size() < 2) {
    throw InsufficientDataError("ranking loss requires at least 2 measurements");
  }
  std::vector<double> mu, y;
  mu.reserve(d_k.size());
  y.reserve(d_k.size());
  for (const auto& m : d_k.measurements()) {
    mu.push_back(surrogate.predict(space.encode(m.config)).mean);
    y.push_back(m.loss);
  }
  return misranked_pairs(mu, y);
}

/// Fold assignment for the cross-validated loss of the top surrogate:
/// leave-one-out up to 5 points, otherwise a deterministic shuffle dealt
/// into 5 folds as equal as possible.
inline std::vector<std::vector<std::size_t>> cv_folds(std::size_t n,
                                                      RandomSource& rng) {
  std::vector<std::vector<std::size_t>> folds;
  if (n <= 5) {
    folds.resize(n);
    for (std::size_t i = 0; i < n; ++i) folds[i].push_back(i);
    return folds;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + rng.index(n - i);
    std::swap(order[i], order[j]);
  }
  folds.resize(5);
  for (std::size_t i = 0; i < n; ++i) folds[i % 5].push_back(order[i]);
  return folds;
}

/// Generalization-aware ranking loss for the surrogate trained on d_k
/// itself: every point is scored by a surrogate fitted without it (or
/// without its fold), then the misranked pairs are counted on those
/// out-of-sample means.
inline std::int64_t cv_ranking_loss(const ConfigurationSpace& space,
                                    const FidelityGroup& d_k,
                                    const ForestParams& params,
                                    RandomSource& rng) {
  std::size_t n = d_k.size();
  if (n < 2) {
    throw InsufficientDataError("cv ranking loss requires at least 2 measurements");
  }
  std::vector<std::vector<double>> encoded;
  encoded.reserve(n);
  for (const auto& m : d_k.measurements()) encoded.push_back(space.encode(m.config));

  auto folds = cv_folds(n, rng);
  // 5-fold training sets can only go below 2 points when n itself is
  // tiny; in that case score with leave-one-out folds instead.
  if (folds.size() == 5 && n - folds.front().size() < 2) {
    folds.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) folds[i].push_back(i);
  }

  std::vector<double> mu(n, 0.0), y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = d_k.measurements()[i].loss;

  for (const auto& fold : folds) {
    std::vector<bool> held(n, false);
    for (auto i : fold) held[i] = true;
    std::vector<TrainingPoint> train;
    train.reserve(n - fold.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!held[i]) train.emplace_back(encoded[i], y[i]);
    }
    if (train.size() >= 2) {
      ForestSurrogate fitted = ForestSurrogate::fit(train, params, rng);
      for (auto i : fold) mu[i] = fitted.predict(encoded[i]).mean;
    } else {
      // A single remaining point admits no tree; its value is the only
      // available out-of-sample estimate.
      for (auto i : fold) mu[i] = train.front().second;
    }
  }
  return misranked_pairs(mu, y);
}

/// Fraction of order-preserving pairs per base: p_i = 1 - loss_i / N_pairs
/// with N_pairs = n_k * (n_k - 1) ordered pairs.
inline std::vector<double> order_preserving_fractions(
    const std::vector<std::int64_t>& losses, std::size_t n_k) {
  if (n_k < 2) throw InsufficientDataError("need at least 2 measurements");
  auto n_pairs = static_cast<double>(n_k) * static_cast<double>(n_k - 1);
  std::vector<double> p;
  p.reserve(losses.size());
  for (auto loss : losses) {
    p.push_back(1.0 - static_cast<double>(loss) / n_pairs);
  }
  return p;
}

/// Weight discrimination operator: w_i = p_i^theta / sum_k p_k^theta.
/// Falls back to uniform weights when every p_i is zero.
inline std::vector<double> weights_from_fractions(const std::vector<double>& p,
                                                  int theta) {
  std::vector<double> w(p.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    w[i] = std::pow(std::max(p[i], 0.0), theta);
    total += w[i];
  }
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(p.size()));
    return w;
  }
  for (auto& wi : w) wi /= total;
  return w;
}

inline std::vector<double> compute_weights(const std::vector<std::int64_t>& losses,
                                           std::size_t n_k, int theta) {
  return weights_from_fractions(order_preserving_fractions(losses, n_k), theta);
}

/// Fuses Gaussian predictions by the generalized Product of Experts:
///   sigma_ens^2 = (sum_i w_i / sigma_i^2)^-1
///   mu_ens      = (sum_i mu_i w_i / sigma_i^2) * sigma_ens^2
/// Entries with zero weight have no effect.
inline Prediction gpoe_predict(const std::vector<Prediction>& predictions,
                               const std::vector<double>& weights) {
  if (predictions.size() != weights.size()) {
    throw DomainError("gpoe_predict requires matching lengths");
  }
  double precision = 0.0;
  double weighted_mean = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (weights[i] == 0.0) continue;
    any = true;
    double inv_var = 1.0 / predictions[i].variance;
    precision += weights[i] * inv_var;
    weighted_mean += predictions[i].mean * weights[i] * inv_var;
  }
  if (!any || precision <= 0.0) {
    throw DegenerateEnsembleError("all ensemble weights are zero");
  }
  double variance = 1.0 / precision;
  return {weighted_mean * variance, variance};
}

/// Weighting strategy for the ensemble. Ranking is the real method; the
/// other modes exist for ablation runs.
enum class WeightMode { Ranking, Equal, SingleBest, TopFidelityOnly };

struct EnsembleParams {
  int theta = 3;
  int k_full_threshold = 50;
  WeightMode mode = WeightMode::Ranking;

  void validate() const {
    if (theta < 1) throw ConfigError("theta must be a positive integer");
    if (k_full_threshold < 1) {
      throw ConfigError("k_full_threshold must be a positive integer");
    }
  }
};

/// The multi-fidelity ensemble surrogate: one base surrogate per fidelity
/// group, fused by gPoE under the current weight vector. Immutable once
/// built; prediction is safe to call concurrently.
class EnsembleSurrogate {
 public:
  struct Base {
    double resource_level = 0.0;
    std::optional<ForestSurrogate> surrogate;  // empty when the group had < 2 points
    double weight = 0.0;
    double p = 0.0;                 // order-preserving fraction behind the weight
    std::size_t measurements = 0;   // group size at build time
  };

  EnsembleSurrogate(std::vector<Base> bases, int theta, int k_full_threshold)
      : bases_(std::move(bases)), theta_(theta), k_full_threshold_(k_full_threshold) {}

  const std::vector<Base>& bases() const { return bases_; }
  int theta() const { return theta_; }
  int k_full_threshold() const { return k_full_threshold_; }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(bases_.size());
    for (const auto& b : bases_) w.push_back(b.weight);
    return w;
  }

  std::vector<double> fractions() const {
    std::vector<double> p;
    p.reserve(bases_.size());
    for (const auto& b : bases_) p.push_back(b.p);
    return p;
  }

  Prediction predict(const std::vector<double>& x) const {
    std::vector<Prediction> preds;
    std::vector<double> w;
    preds.reserve(bases_.size());
    w.reserve(bases_.size());
    for (const auto& b : bases_) {
      if (b.weight == 0.0 || !b.surrogate.has_value()) continue;
      preds.push_back(b.surrogate->predict(x));
      w.push_back(b.weight);
    }
    return gpoe_predict(preds, w);
  }

 private:
  std::vector<Base> bases_;
  int theta_;
  int k_full_threshold_;
};

/// Builds the ensemble from the fidelity groups, lowest resource first
/// (the last group is the high-fidelity one).
///
/// Base surrogates are fitted on every group with at least 2 points. When
/// the top group is trainable, weights come from ranking losses ranked on
/// it (cross-validated for the top surrogate itself); otherwise available
/// bases share uniform weight. Once the top group reaches
/// k_full_threshold points, all weight moves to the top surrogate.
/// Returns nothing when no group is trainable.
inline std::optional<EnsembleSurrogate> build_ensemble(
    const ConfigurationSpace& space, const std::vector<const FidelityGroup*>& groups,
    const ForestParams& forest_params, const EnsembleParams& ensemble_params,
    RandomSource& rng) {
  forest_params.validate();
  ensemble_params.validate();
  if (groups.empty()) throw ConfigError("build_ensemble needs at least one group");

  std::size_t count = groups.size();
  std::vector<EnsembleSurrogate::Base> bases(count);
  std::vector<std::size_t> available;
  for (std::size_t i = 0; i < count; ++i) {
    bases[i].resource_level = groups[i]->resource_level();
    bases[i].measurements = groups[i]->size();
    if (groups[i]->size() >= 2) {
      bases[i].surrogate =
          ForestSurrogate::fit(standardize(space, *groups[i]), forest_params, rng);
      available.push_back(i);
    }
  }
  if (available.empty()) return std::nullopt;

  const FidelityGroup& top = *groups.back();
  std::size_t top_index = count - 1;
  bool top_trainable = bases[top_index].surrogate.has_value();

  if (ensemble_params.mode == WeightMode::TopFidelityOnly) {
    if (!top_trainable) return std::nullopt;
    bases[top_index].weight = 1.0;
    bases[top_index].p = 1.0;
    return EnsembleSurrogate(std::move(bases), ensemble_params.theta,
                             ensemble_params.k_full_threshold);
  }

  // Convergence safeguard: with enough high-fidelity measurements the
  // ensemble collapses onto the top surrogate.
  if (top_trainable &&
      top.size() >= static_cast<std::size_t>(ensemble_params.k_full_threshold)) {
    bases[top_index].weight = 1.0;
    bases[top_index].p = 1.0;
    return EnsembleSurrogate(std::move(bases), ensemble_params.theta,
                             ensemble_params.k_full_threshold);
  }

  if (!top_trainable || ensemble_params.mode == WeightMode::Equal) {
    double w = 1.0 / static_cast<double>(available.size());
    for (auto i : available) bases[i].weight = w;
    return EnsembleSurrogate(std::move(bases), ensemble_params.theta,
                             ensemble_params.k_full_threshold);
  }

  std::vector<std::int64_t> losses;
  losses.reserve(available.size());
  for (auto i : available) {
    if (i == top_index) {
      losses.push_back(cv_ranking_loss(space, top, forest_params, rng));
    } else {
      losses.push_back(ranking_loss(*bases[i].surrogate, space, top));
    }
  }
  std::vector<double> p = order_preserving_fractions(losses, top.size());

  if (ensemble_params.mode == WeightMode::SingleBest) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j) {
      if (p[j] >= p[best]) best = j;  // ties go to the higher fidelity
    }
    for (std::size_t j = 0; j < available.size(); ++j) {
      bases[available[j]].p = p[j];
      bases[available[j]].weight = j == best ? 1.0 : 0.0;
    }
    return EnsembleSurrogate(std::move(bases), ensemble_params.theta,
                             ensemble_params.k_full_threshold);
  }

  std::vector<double> w = weights_from_fractions(p, ensemble_params.theta);
  for (std::size_t j = 0; j < available.size(); ++j) {
    bases[available[j]].p = p[j];
    bases[available[j]].weight = w[j];
  }
  return EnsembleSurrogate(std::move(bases), ensemble_params.theta,
                           ensemble_params.k_full_threshold);
}

}  // namespace mfes
