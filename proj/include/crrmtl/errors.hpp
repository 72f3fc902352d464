#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crrmtl {

// Failure classes map onto disjoint CLI exit codes:
//   InputError -> 2, StatisticalError -> 3, CalibrationError -> 4.

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public InputError {
 public:
  explicit SchemaError(const std::string& column)
      : InputError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class RowError : public InputError {
 public:
  RowError(std::size_t row, const std::string& what)
      : InputError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class SampleSizeError : public InputError {
 public:
  using InputError::InputError;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

// tau beyond the observed follow-up of a group; the estimators never extrapolate.
class ExtrapolationError : public InputError {
 public:
  using InputError::InputError;
};

class StatisticalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Test statistic undefined (zero variance, no events of the cause).
class UndefinedTestError : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

class InfeasibleDesignError : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

class DegeneratePilotError : public StatisticalError {
 public:
  using StatisticalError::StatisticalError;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crrmtl
