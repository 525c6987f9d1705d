#pragma once

#include <stdexcept>
#include <string>

namespace chaoslab {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or input-validation failure (bad sizes, out-of-range parameters).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A mathematical hypothesis of a bound is not met (e.g. a norm too large).
class OutOfHypothesis : public Error {
public:
    using Error::Error;
};

/// A numerical breakdown detected during a run (non-finite values, CFL violation).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace chaoslab
