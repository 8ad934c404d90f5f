#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mfes/errors.hpp"
#include "mfes/random.hpp"

namespace mfes {

enum class ParamKind { Continuous, Integer, Categorical };

/// Value of a single hyperparameter inside a configuration.
using ParamValue = std::variant<double, std::int64_t, std::string>;

/// One dimension of the search space.
class ParameterSpec {
 public:
  static ParameterSpec continuous(std::string name, double low, double high,
                                  bool log_scale = false) {
    ParameterSpec spec;
    spec.name_ = std::move(name);
    spec.kind_ = ParamKind::Continuous;
    spec.low_ = low;
    spec.high_ = high;
    spec.log_scale_ = log_scale;
    spec.validate();
    return spec;
  }

  static ParameterSpec integer(std::string name, std::int64_t low,
                               std::int64_t high, bool log_scale = false) {
    ParameterSpec spec;
    spec.name_ = std::move(name);
    spec.kind_ = ParamKind::Integer;
    spec.low_ = static_cast<double>(low);
    spec.high_ = static_cast<double>(high);
    spec.log_scale_ = log_scale;
    spec.validate();
    return spec;
  }

  static ParameterSpec categorical(std::string name,
                                   std::vector<std::string> choices) {
    ParameterSpec spec;
    spec.name_ = std::move(name);
    spec.kind_ = ParamKind::Categorical;
    spec.choices_ = std::move(choices);
    spec.validate();
    return spec;
  }

  const std::string& name() const { return name_; }
  ParamKind kind() const { return kind_; }
  double low() const { return low_; }
  double high() const { return high_; }
  bool log_scale() const { return log_scale_; }
  const std::vector<std::string>& choices() const { return choices_; }

  /// Width of this parameter in the encoded vector (1, or one-hot width).
  std::size_t encoded_width() const {
    return kind_ == ParamKind::Categorical ? choices_.size() : 1;
  }

  bool contains(const ParamValue& value) const {
    switch (kind_) {
      case ParamKind::Continuous:
        if (!std::holds_alternative<double>(value)) return false;
        return std::get<double>(value) >= low_ && std::get<double>(value) <= high_;
      case ParamKind::Integer:
        if (!std::holds_alternative<std::int64_t>(value)) return false;
        return static_cast<double>(std::get<std::int64_t>(value)) >= low_ &&
               static_cast<double>(std::get<std::int64_t>(value)) <= high_;
      case ParamKind::Categorical:
        if (!std::holds_alternative<std::string>(value)) return false;
        return std::find(choices_.begin(), choices_.end(),
                         std::get<std::string>(value)) != choices_.end();
    }
    return false;
  }

  /// Maps a numeric value into [0, 1], through log space when flagged.
  double to_unit(double value) const {
    if (log_scale_) {
      return (std::log(value) - std::log(low_)) /
             (std::log(high_) - std::log(low_));
    }
    return (value - low_) / (high_ - low_);
  }

  /// Inverse of to_unit. Clamps to the domain.
  double from_unit(double unit) const {
    unit = std::clamp(unit, 0.0, 1.0);
    double value;
    if (log_scale_) {
      value = std::exp(std::log(low_) + unit * (std::log(high_) - std::log(low_)));
    } else {
      value = low_ + unit * (high_ - low_);
    }
    return std::clamp(value, low_, high_);
  }

 private:
  ParameterSpec() = default;

  void validate() const {
    if (name_.empty()) throw ConfigError("parameter name must not be empty");
    if (kind_ == ParamKind::Categorical) {
      if (choices_.size() < 2) {
        throw ConfigError("categorical parameter '" + name_ +
                          "' needs at least 2 choices");
      }
      std::set<std::string> unique(choices_.begin(), choices_.end());
      if (unique.size() != choices_.size()) {
        throw ConfigError("categorical parameter '" + name_ +
                          "' has duplicate choices");
      }
      return;
    }
    if (!(low_ < high_)) {
      throw ConfigError("parameter '" + name_ + "' requires low < high");
    }
    if (log_scale_ && !(low_ > 0.0)) {
      throw ConfigError("log-scaled parameter '" + name_ +
                        "' requires low > 0");
    }
    if (kind_ == ParamKind::Integer) {
      if (low_ != std::floor(low_) || high_ != std::floor(high_)) {
        throw ConfigError("integer parameter '" + name_ +
                          "' requires integral bounds");
      }
    }
  }

  std::string name_;
  ParamKind kind_ = ParamKind::Continuous;
  double low_ = 0.0;
  double high_ = 1.0;
  bool log_scale_ = false;
  std::vector<std::string> choices_;
};

/// A concrete point in the search space. Immutable; the id is a content
/// hash of the values, so equal configurations share an id.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::map<std::string, ParamValue> values, std::uint64_t id)
      : values_(std::move(values)), id_(id) {}

  const std::map<std::string, ParamValue>& values() const { return values_; }
  std::uint64_t id() const { return id_; }

  const ParamValue& at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) {
      throw DomainError("configuration has no parameter '" + name + "'");
    }
    return it->second;
  }

  double value_as_double(const std::string& name) const {
    const ParamValue& v = at(name);
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    if (std::holds_alternative<std::int64_t>(v)) {
      return static_cast<double>(std::get<std::int64_t>(v));
    }
    throw DomainError("parameter '" + name + "' is not numeric");
  }

  bool operator==(const Configuration& other) const {
    return values_ == other.values_;
  }

 private:
  std::map<std::string, ParamValue> values_;
  std::uint64_t id_ = 0;
};

/// The hyperparameter search space: an ordered list of parameters with
/// uniform sampling and a fixed-width numeric encoding for surrogates.
/// Immutable after construction and safe to share across threads.
class ConfigurationSpace {
 public:
  explicit ConfigurationSpace(std::vector<ParameterSpec> parameters)
      : parameters_(std::move(parameters)) {
    if (parameters_.empty()) {
      throw ConfigError("configuration space must not be empty");
    }
    std::set<std::string> names;
    encoded_width_ = 0;
    for (const auto& p : parameters_) {
      if (!names.insert(p.name()).second) {
        throw ConfigError("duplicate parameter name '" + p.name() + "'");
      }
      encoded_width_ += p.encoded_width();
    }
  }

  const std::vector<ParameterSpec>& parameters() const { return parameters_; }
  std::size_t dimension() const { return parameters_.size(); }
  std::size_t encoded_width() const { return encoded_width_; }

  /// Draws every parameter independently and uniformly over its domain
  /// (uniformly in log space for log-scaled parameters).
  Configuration sample_uniform(RandomSource& rng) const {
    std::map<std::string, ParamValue> values;
    for (const auto& p : parameters_) {
      switch (p.kind()) {
        case ParamKind::Continuous:
          if (p.log_scale()) {
            values[p.name()] = p.from_unit(rng.uniform01());
          } else {
            values[p.name()] = rng.uniform(p.low(), p.high());
          }
          break;
        case ParamKind::Integer:
          if (p.log_scale()) {
            values[p.name()] = round_to_int(p.from_unit(rng.uniform01()), p);
          } else {
            auto span = static_cast<std::size_t>(p.high() - p.low()) + 1;
            values[p.name()] = static_cast<std::int64_t>(p.low()) +
                               static_cast<std::int64_t>(rng.index(span));
          }
          break;
        case ParamKind::Categorical:
          values[p.name()] = p.choices()[rng.index(p.choices().size())];
          break;
      }
    }
    return make_configuration(std::move(values));
  }

  /// Validates values against the space and assigns the content-hash id.
  Configuration make_configuration(std::map<std::string, ParamValue> values) const {
    if (values.size() != parameters_.size()) {
      throw DomainError("configuration has wrong number of values");
    }
    for (const auto& p : parameters_) {
      auto it = values.find(p.name());
      if (it == values.end()) {
        throw DomainError("configuration is missing parameter '" + p.name() + "'");
      }
      if (!p.contains(it->second)) {
        throw DomainError("value for parameter '" + p.name() +
                          "' is outside its domain");
      }
    }
    std::uint64_t id = hash_values(values);
    return Configuration(std::move(values), id);
  }

  /// Numeric vector for surrogate input: numeric parameters scaled to
  /// [0, 1] (log first when flagged), categoricals one-hot.
  std::vector<double> encode(const Configuration& config) const {
    check_membership(config);
    std::vector<double> out;
    out.reserve(encoded_width_);
    for (const auto& p : parameters_) {
      const ParamValue& v = config.at(p.name());
      switch (p.kind()) {
        case ParamKind::Continuous:
          out.push_back(p.to_unit(std::get<double>(v)));
          break;
        case ParamKind::Integer:
          out.push_back(p.to_unit(static_cast<double>(std::get<std::int64_t>(v))));
          break;
        case ParamKind::Categorical: {
          const auto& choice = std::get<std::string>(v);
          for (const auto& c : p.choices()) out.push_back(c == choice ? 1.0 : 0.0);
          break;
        }
      }
    }
    return out;
  }

  /// Inverse of encode. Integers round half-up; categoricals take the
  /// largest coordinate (lowest index wins ties).
  Configuration decode(const std::vector<double>& encoded) const {
    if (encoded.size() != encoded_width_) {
      throw DomainError("encoded vector has wrong width");
    }
    std::map<std::string, ParamValue> values;
    std::size_t offset = 0;
    for (const auto& p : parameters_) {
      switch (p.kind()) {
        case ParamKind::Continuous:
          values[p.name()] = p.from_unit(encoded[offset]);
          offset += 1;
          break;
        case ParamKind::Integer:
          values[p.name()] = round_to_int(p.from_unit(encoded[offset]), p);
          offset += 1;
          break;
        case ParamKind::Categorical: {
          std::size_t width = p.choices().size();
          std::size_t best = 0;
          for (std::size_t i = 1; i < width; ++i) {
            if (encoded[offset + i] > encoded[offset + best]) best = i;
          }
          values[p.name()] = p.choices()[best];
          offset += width;
          break;
        }
      }
    }
    return make_configuration(std::move(values));
  }

 private:
  static std::int64_t round_to_int(double value, const ParameterSpec& p) {
    auto rounded = static_cast<std::int64_t>(std::floor(value + 0.5));
    rounded = std::max(rounded, static_cast<std::int64_t>(p.low()));
    rounded = std::min(rounded, static_cast<std::int64_t>(p.high()));
    return rounded;
  }

  void check_membership(const Configuration& config) const {
    if (config.values().size() != parameters_.size()) {
      throw DomainError("configuration does not belong to this space");
    }
    for (const auto& p : parameters_) {
      auto it = config.values().find(p.name());
      if (it == config.values().end() || !p.contains(it->second)) {
        throw DomainError("configuration does not belong to this space");
      }
    }
  }

  std::uint64_t hash_values(const std::map<std::string, ParamValue>& values) const {
    std::uint64_t h = fnv1a64(nullptr, 0);
    for (const auto& p : parameters_) {
      const ParamValue& v = values.at(p.name());
      h = fnv1a64(p.name().data(), p.name().size(), h);
      if (std::holds_alternative<double>(v)) {
        h = fnv1a64(std::get<double>(v), h);
      } else if (std::holds_alternative<std::int64_t>(v)) {
        h = fnv1a64(static_cast<std::uint64_t>(std::get<std::int64_t>(v)), h);
      } else {
        const auto& s = std::get<std::string>(v);
        h = fnv1a64(s.data(), s.size(), h);
      }
    }
    return h;
  }

  std::vector<ParameterSpec> parameters_;
  std::size_t encoded_width_ = 0;
};

}  // namespace mfes
