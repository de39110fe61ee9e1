#ifndef CARLEMAN_ERRORS_HPP
#define CARLEMAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace carleman {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's documented input range.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Bad weight access: index past the end of an explicit list, or a
/// non-positive stored weight.
class WeightError : public Error {
 public:
  using Error::Error;
};

/// Malformed weight family string or weight file.
class WeightSpecError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer
/// (bracket failure, supremum not stabilising, non-positive propagation).
class NumericError : public Error {
 public:
  using Error::Error;
};

class BracketError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace carleman

#endif  // CARLEMAN_ERRORS_HPP
