#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsvm {

// Base class for all library errors. The CLI maps subclasses to exit codes:
// ValidationError -> 1, IoError -> 2, ConstraintUnsatisfied -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public ValidationError {
 public:
  DimensionMismatch(const std::string& what, std::size_t expected, std::size_t got)
      : ValidationError(what + ": expected length " + std::to_string(expected) +
                        ", got " + std::to_string(got)) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Thrown when the lambda-doubling loop exhausts its budget without finding a
// solution whose equality-constraint residual is zero.
class ConstraintUnsatisfied : public Error {
 public:
  ConstraintUnsatisfied(long long residual, int doublings)
      : Error("constraint alpha'y = 0 unsatisfied after " + std::to_string(doublings) +
              " lambda doublings (final integer residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  long long residual() const { return residual_; }

 private:
  long long residual_;
};

// A model with alpha = 0 has no support vectors and cannot predict.
class NoSupportVectors : public Error {
 public:
  explicit NoSupportVectors(const std::string& msg = "model has no support vectors")
      : Error(msg) {}
};

}  // namespace qsvm
