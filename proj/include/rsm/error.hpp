#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rsm {

/// Base of every error raised by the library. `code()` is the process exit
/// status the command-line front end uses for this category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int code() const noexcept { return 1; }
};

/// Argument outside an operation's domain (negative distance, wrong dimension...).
class DomainError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 2; }
};

/// Covariance matrix could not be factorized even after diagonal jitter.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, std::vector<double> jitters)
      : Error(what), jitters_(std::move(jitters)) {}
  int code() const noexcept override { return 3; }
  const std::vector<double>& attempted_jitters() const noexcept { return jitters_; }

 private:
  std::vector<double> jitters_;
};

/// Every restart of a likelihood fit failed.
class FitFailedError : public Error {
 public:
  FitFailedError(const std::string& what, std::vector<std::string> diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  int code() const noexcept override { return 4; }
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Least-squares design matrix without full column rank.
class SingularDesignError : public Error {
 public:
  SingularDesignError(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}
  int code() const noexcept override { return 5; }
  const std::vector<std::string>& collinear_columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

/// Pearson correlation requested for a constant vector.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 6; }
};

/// Malformed input file. Carries the 1-based data row when one applies (0 otherwise).
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::size_t row = 0) : Error(what), row_(row) {}
  int code() const noexcept override { return 7; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Inconsistent run configuration, detected before any fitting starts.
class ConfigError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 8; }
};

/// A Hill model evaluated where IC50 is not positive.
class EvaluationError : public Error {
 public:
  using Error::Error;
  int code() const noexcept override { return 9; }
};

}  // namespace rsm
