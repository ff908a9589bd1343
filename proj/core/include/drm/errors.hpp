#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A network construction was asked for something it cannot build.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// B-spline index outside -3 < i < 2^l.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyBatchError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class BudgetTooSmallError : public Error {
 public:
  using Error::Error;
};

class SolverFailureError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration / serialized input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A tape node produced a non-finite value.
class NumericOverflowError : public Error {
 public:
  NumericOverflowError(std::size_t node, const std::string& op)
      : Error("non-finite value at tape node " + std::to_string(node) + " (" + op + ")"),
        node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

}  // namespace drm
