#pragma once

#include <stdexcept>
#include <string>

namespace cellhom {

// Everything user-facing throws one of these; the CLI maps them to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input: bad files, inconsistent sizes, out-of-range parameters.
struct ConfigError : Error {
    using Error::Error;
};

// Mismatched grids/lattices between operands.
struct DimensionError : ConfigError {
    using ConfigError::ConfigError;
};

// Iterative solve did not reach the requested tolerance.
struct SolverError : Error {
    SolverError(const std::string& what, double residual_, int iterations_)
        : Error(what), residual(residual_), iterations(iterations_) {}
    double residual;
    int iterations;
};

// An operation's mathematical precondition failed (e.g. Hill-Mandel on a
// stress that is not divergence-free).
struct PreconditionError : Error {
    using Error::Error;
};

} // namespace cellhom
