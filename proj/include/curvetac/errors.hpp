#pragma once

#include <stdexcept>
#include <string>

namespace curvetac {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated files, wrong magic numbers, unparsable documents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Linear solves that fail, unreachable paths and other numerical breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace curvetac
