#pragma once

#include <stdexcept>
#include <string>

namespace blocksolve {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape/partition mismatches. Messages name the offending block index
/// where one exists.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid scalar or structural parameters (eta <= 0, n > N, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// File parse/serialization failures; message carries field context.
class IoError : public Error {
public:
    using Error::Error;
};

/// Failures raised while iterating (invariant checks, inner solver
/// non-convergence, oracle callbacks).
class SolverError : public Error {
public:
    using Error::Error;
};

} // namespace blocksolve
