#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace imk {

// Base of every error the library throws. The CLI maps subclasses onto exit
// codes: InvalidInput/ParseError -> 2, PropertyFailure -> 1,
// NumericalFailure -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InvalidInput(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Evaluation outside the domain of an expression (ln of a nonpositive value,
// division by zero). Carries the printed offending subexpression.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpr)
      : Error(what + ": " + subexpr), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// Sampling could not evaluate an expression at any point.
class ZeroTestUnknown : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// A property the analysis depends on does not hold (CLI exit 1).
class PropertyFailure : public Error {
 public:
  using Error::Error;
};

// pi does not divide the numerator of S.
class NoInternalModel : public PropertyFailure {
 public:
  using PropertyFailure::PropertyFailure;
};

// No T with FT = TQ and phi T = theta within tolerance.
class NoEmbedding : public PropertyFailure {
 public:
  using PropertyFailure::PropertyFailure;
};

}  // namespace imk
