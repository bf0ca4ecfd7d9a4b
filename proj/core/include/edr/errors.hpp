#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace edr {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input dimensions disagree with the model or each other.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked in the wrong order (e.g. backward before forward).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid combination of user-facing options.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what), row_(row), column_(column) {}

  /// 1-based line number in the source file.
  std::size_t row() const noexcept { return row_; }
  /// 1-based column; 0 when the error concerns the whole row.
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::size_t iteration,
                   std::vector<std::size_t> batch)
      : std::runtime_error(what), iteration_(iteration), batch_(std::move(batch)) {}

  std::size_t iteration() const noexcept { return iteration_; }
  const std::vector<std::size_t>& batch_indices() const noexcept { return batch_; }

 private:
  std::size_t iteration_;
  std::vector<std::size_t> batch_;
};

}  // namespace edr
