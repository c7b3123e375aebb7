#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace permsig {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input values (bad probability vector, non-permutation, NaN...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input sequence has the wrong length for the requested operation.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// A configuration parameter is out of range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples to fit or summarize.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. a single class present).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked on an object in the wrong state (e.g. untrained model).
class StateError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double kkt_residual)
      : Error(what), residual_(kkt_residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Evaluation protocol cannot run for a given subject.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string subject)
      : Error(what), subject_(std::move(subject)) {}
  const std::string& subject() const noexcept { return subject_; }

 private:
  std::string subject_;
};

}  // namespace permsig
