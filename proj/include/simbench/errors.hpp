#pragma once

#include <stdexcept>
#include <string>

namespace simbench {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments, malformed configuration, or violated preconditions.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input data is degenerate for the requested operation (constant series,
/// non-positive scaling mean, too-short series, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A model fit could not be completed (singular design matrix, no feasible
/// threshold split, diverging training loss, ...).
class FitError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during simulation or prediction (overflow, divergence).
class NumericError : public Error {
public:
    using Error::Error;
};

/// An error in a metric computation (undefined denominator etc.).
class MetricError : public Error {
public:
    using Error::Error;
};

/// File system / serialization failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// Internal consistency violation; indicates a bug, not a user error.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace simbench
