#pragma once

#include <stdexcept>
#include <string>

namespace mabrl {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad sizes, out-of-range values).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Explicit integration produced a non-finite state.
class IntegrationDivergence : public Error {
 public:
  using Error::Error;
};

// A linear solve failed or produced non-finite output.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mabrl
