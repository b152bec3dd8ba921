#pragma once

#include <stdexcept>
#include <string>

namespace dsbn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed files, unknown names, bad CLI arguments.
struct InputError : Error {
  using Error::Error;
};

/// A scope is not contained in another, or two variables disagree on identity.
struct ScopeError : Error {
  using Error::Error;
};

struct InversionError : Error {
  using Error::Error;
};

/// Total (or numerically total) conflict under Dempster's rule.
struct CombinationError : Error {
  using Error::Error;
};

struct ConditioningError : Error {
  using Error::Error;
};

struct InvalidMassError : Error {
  using Error::Error;
};

struct DegenerateTestError : Error {
  using Error::Error;
};

struct TestUndefinedError : Error {
  using Error::Error;
};

struct GraphError : Error {
  using Error::Error;
};

struct NetworkError : Error {
  using Error::Error;
};

struct SamplingError : Error {
  using Error::Error;
};

}  // namespace dsbn
