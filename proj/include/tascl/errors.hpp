#pragma once

#include <stdexcept>
#include <string>

namespace tascl {

/// Invalid sizes, out-of-domain parameters, malformed inputs.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition (e.g. a nonzero frozen bit).
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Internal invariant violated; indicates a bug, never a user error.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace tascl
