#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace nbsparse {

/// Precondition failure on the caller's side (shape mismatch, bad option).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside a function's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation produced a non-finite value. Carries whatever location
/// information the raising routine had.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::size_t> row = std::nullopt,
                          std::optional<std::size_t> iteration = std::nullopt,
                          std::optional<std::size_t> coordinate = std::nullopt)
      : std::runtime_error(what), row_(row), iteration_(iteration), coordinate_(coordinate) {}

  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> iteration() const noexcept { return iteration_; }
  std::optional<std::size_t> coordinate() const noexcept { return coordinate_; }

 private:
  std::optional<std::size_t> row_;
  std::optional<std::size_t> iteration_;
  std::optional<std::size_t> coordinate_;
};

/// Malformed input file. `line` is 1-based; 0 means the whole file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& message)
      : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
        file_(file),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace nbsparse
