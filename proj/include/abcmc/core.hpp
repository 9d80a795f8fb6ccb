#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace abcmc {

/// Row-per-record storage used by reference tables.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One-based model label, 1 <= value <= M.
struct ModelIndex {
  int value = 1;

  constexpr ModelIndex() = default;
  constexpr explicit ModelIndex(int v) : value(v) {}

  /// Position of this model in zero-based per-model arrays.
  constexpr std::size_t slot() const { return static_cast<std::size_t>(value - 1); }
  static constexpr ModelIndex from_slot(std::size_t slot) { return ModelIndex(static_cast<int>(slot) + 1); }

  friend constexpr auto operator<=>(ModelIndex, ModelIndex) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violations on user-supplied arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// File system failures (missing input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

}  // namespace abcmc
