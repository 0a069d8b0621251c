#pragma once

#include <stdexcept>
#include <string>

namespace truncmean {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, law or configuration parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation (n < 2, b < 1, empty sample...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative or quadrature routine failed to reach its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The truncated sample has zero spread, so a studentized statistic is undefined.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// A simulation plan exceeds the configured draw budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace truncmean
