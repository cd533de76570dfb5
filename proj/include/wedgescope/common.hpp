#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wedge {

/// A point in D-dimensional weight/configuration space.
using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  numerical,
  io,
};

/// Base exception for everything thrown by the library. The kind maps onto the
/// C API status codes and the CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(ErrorKind::dimension_mismatch, what) {}
  DimensionMismatch(const std::string& context, std::size_t expected, std::size_t got);
};

/// Non-finite loss or gradient. `step` is the optimizer step (or segment/waypoint
/// index, depending on the caller) at which the problem surfaced; -1 if unknown.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long step = -1)
      : Error(ErrorKind::numerical, what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

void require_dimension(const ParamVector& v, std::size_t expected, const char* context);
void require_finite(const ParamVector& v, const char* context);
bool all_finite(const ParamVector& v);

}  // namespace wedge
