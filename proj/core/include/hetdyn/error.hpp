#pragma once

#include <stdexcept>
#include <string>

namespace hetdyn {

/// Base of every error thrown by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what)
      : Error("invalid-parameter", what) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& what)
      : Error("invalid-state", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error("dimension-mismatch", what) {}
};

class IntegrationBlowup : public Error {
 public:
  IntegrationBlowup(const std::string& what, double last_valid_time)
      : Error("integration-blowup", what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

class NoSteadyState : public Error {
 public:
  NoSteadyState(const std::string& what, double best_residual)
      : Error("no-steady-state", what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class NoFront : public Error {
 public:
  explicit NoFront(const std::string& what) : Error("no-front", what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what)
      : Error("insufficient-data", what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, std::string key)
      : Error("parse-error", what), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

class PreconditionFailed : public Error {
 public:
  explicit PreconditionFailed(const std::string& what)
      : Error("precondition-failed", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io-error", what) {}
};

}  // namespace hetdyn
