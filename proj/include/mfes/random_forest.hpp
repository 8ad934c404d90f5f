#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "mfes/errors.hpp"
#include "mfes/random.hpp"

namespace mfes {

/// One encoded training point: (surrogate input vector, target).
using TrainingPoint = std::pair<std::vector<double>, double>;

struct ForestParams {
  int n_trees = 10;
  int min_samples_leaf = 3;
  double max_features_ratio = 5.0 / 6.0;
  bool bootstrap = true;
  double variance_floor = 1e-10;

  void validate() const {
    if (n_trees < 1) throw ConfigError("n_trees must be positive");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be positive");
    if (!(max_features_ratio > 0.0) || max_features_ratio > 1.0) {
      throw ConfigError("max_features_ratio must be in (0, 1]");
    }
    if (!(variance_floor > 0.0)) throw ConfigError("variance_floor must be positive");
  }
};

/// Gaussian prediction in standardized-loss units.
struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Combines per-tree leaf means into the forest's Gaussian prediction:
/// mean of the tree means, population variance floored from below.
inline Prediction aggregate_tree_means(const std::vector<double>& means,
                                       double variance_floor) {
  double mean = std::accumulate(means.begin(), means.end(), 0.0) /
                static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(means.size());
  return {mean, std::max(var, variance_floor)};
}

/// Axis-aligned regression tree grown by greedy squared-error splitting.
///
/// Targets are centered on the sample mean before any split scoring:
/// prefix-sum SSE on offset targets cancels catastrophically and can
/// flip near-tied splits, which would break the forest's translation
/// consistency. Leaf values carry the center back.
class RegressionTree {
 public:
  /// indices selects the training rows (bootstrap sample) this tree sees.
  RegressionTree(const std::vector<TrainingPoint>& data,
                 std::vector<std::size_t> indices, const ForestParams& params,
                 RandomSource& rng)
      : width_(data.front().first.size()) {
    double sum = 0.0;
    for (auto i : indices) sum += data[i].second;
    center_ = sum / static_cast<double>(indices.size());
    nodes_.reserve(2 * indices.size());
    grow(data, std::move(indices), params, rng);
  }

  double predict(const std::vector<double>& x) const {
    int node = 0;
    while (nodes_[node].feature >= 0) {
      const Node& n = nodes_[node];
      node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[node].value;
  }

  std::size_t width() const { return width_; }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  double residual(const std::vector<TrainingPoint>& data, std::size_t i) const {
    return data[i].second - center_;
  }

  int grow(const std::vector<TrainingPoint>& data,
           std::vector<std::size_t> indices, const ForestParams& params,
           RandomSource& rng) {
    int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    bool pure = true;
    for (auto i : indices) {
      sum += residual(data, i);
      pure = pure && data[i].second == data[indices.front()].second;
    }
    double mean = center_ + sum / static_cast<double>(indices.size());

    // A pure node has nothing to gain from splitting; every candidate
    // would tie at zero error and the tie would be broken by floating
    // point noise.
    if (pure) {
      nodes_[id].value = mean;
      return id;
    }

    auto best = find_best_split(data, indices, params, rng);
    if (best.feature < 0) {
      nodes_[id].value = mean;
      return id;
    }

    std::vector<std::size_t> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (auto i : indices) {
      if (data[i].first[static_cast<std::size_t>(best.feature)] <= best.threshold) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    indices.clear();
    indices.shrink_to_fit();

    int left_id = grow(data, std::move(left), params, rng);
    int right_id = grow(data, std::move(right), params, rng);
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    nodes_[id].left = left_id;
    nodes_[id].right = right_id;
    return id;
  }

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  /// Scans a random feature subset for the split minimizing the summed
  /// squared error of the two children. Ties keep the first candidate
  /// seen, i.e. the lowest feature index, then the lowest threshold.
  /// Scores within a relative tolerance count as tied: bootstrap
  /// duplicates make one partition reachable through several features,
  /// and those must not be ranked by summation noise.
  Split find_best_split(const std::vector<TrainingPoint>& data,
                        const std::vector<std::size_t>& indices,
                        const ForestParams& params, RandomSource& rng) const {
    std::size_t n = indices.size();
    auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    Split best;
    if (n < 2 * min_leaf) return best;

    std::size_t n_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(params.max_features_ratio * static_cast<double>(width_) -
                         1e-9)));
    n_features = std::min(n_features, width_);

    std::vector<std::size_t> features(width_);
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = 0; i < n_features; ++i) {
      std::size_t j = i + rng.index(width_ - i);
      std::swap(features[i], features[j]);
    }
    features.resize(n_features);
    std::sort(features.begin(), features.end());

    double total_sum = 0.0, total_sq = 0.0;
    for (auto i : indices) {
      double y = residual(data, i);
      total_sum += y;
      total_sq += y * y;
    }
    double node_sse =
        total_sq - total_sum * total_sum / static_cast<double>(n);
    double tie_slack = 1e-10 * std::max(node_sse, 1e-300);

    std::vector<std::pair<double, double>> column(n);  // (x_f, centered y)
    for (std::size_t f : features) {
      for (std::size_t k = 0; k < n; ++k) {
        column[k] = {data[indices[k]].first[f], residual(data, indices[k])};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += column[k - 1].second;
        left_sq += column[k - 1].second * column[k - 1].second;
        if (column[k - 1].first >= column[k].first) continue;  // no gap
        if (k < min_leaf || n - k < min_leaf) continue;
        double right_sum = total_sum - left_sum;
        double right_sq = total_sq - left_sq;
        double score =
            (left_sq - left_sum * left_sum / static_cast<double>(k)) +
            (right_sq - right_sum * right_sum / static_cast<double>(n - k));
        if (score < best.score - tie_slack) {
          best.feature = static_cast<int>(f);
          best.threshold = (column[k - 1].first + column[k].first) / 2.0;
          best.score = score;
        }
      }
    }
    return best;
  }

  std::size_t width_;
  double center_ = 0.0;
  std::vector<Node> nodes_;
};

/// SMAC-style probabilistic random forest: the base surrogate for one
/// fidelity group. Fitted once, then immutable; predict is safe to call
/// concurrently.
class ForestSurrogate {
 public:
  /// Trains n_trees trees, each on a bootstrap resample of data (the full
  /// data when bootstrap is off). Deterministic given the random source.
  static ForestSurrogate fit(const std::vector<TrainingPoint>& data,
                             const ForestParams& params, RandomSource& rng) {
    params.validate();
    if (data.size() < 2) {
      throw InsufficientDataError("forest fit requires at least 2 points");
    }
    std::size_t width = data.front().first.size();
    for (const auto& [x, y] : data) {
      if (x.size() != width) {
        throw DomainError("training vectors must share a single width");
      }
    }
    ForestSurrogate surrogate;
    surrogate.width_ = width;
    surrogate.train_count_ = data.size();
    surrogate.variance_floor_ = params.variance_floor;
    surrogate.trees_.reserve(static_cast<std::size_t>(params.n_trees));
    std::vector<std::size_t> indices(data.size());
    for (int t = 0; t < params.n_trees; ++t) {
      if (params.bootstrap) {
        for (auto& i : indices) i = rng.index(data.size());
      } else {
        std::iota(indices.begin(), indices.end(), 0);
      }
      surrogate.trees_.emplace_back(data, indices, params, rng);
    }
    return surrogate;
  }

  Prediction predict(const std::vector<double>& x) const {
    if (x.size() != width_) {
      throw DomainError("prediction input width does not match training width");
    }
    std::vector<double> means;
    means.reserve(trees_.size());
    for (const auto& tree : trees_) means.push_back(tree.predict(x));
    return aggregate_tree_means(means, variance_floor_);
  }

  std::size_t width() const { return width_; }
  std::size_t train_count() const { return train_count_; }
  std::size_t tree_count() const { return trees_.size(); }

 private:
  ForestSurrogate() = default;

  std::size_t width_ = 0;
  std::size_t train_count_ = 0;
  double variance_floor_ = 1e-10;
  std::vector<RegressionTree> trees_;
};

}  // namespace mfes
