#pragma once

#include <stdexcept>
#include <string>

namespace mfes {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid parameter definitions, malformed run configs, bad values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Configuration does not belong to the space, vector width mismatch, etc.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Not enough measurements to fit or score a surrogate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Every ensemble weight is zero; the fused prediction is undefined.
class DegenerateEnsembleError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or unreadable run history.
class HistoryError : public Error {
 public:
  HistoryError(const std::string& what, long line) : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// The evaluator described by the run config cannot be constructed.
class EvaluatorSetupError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfes
