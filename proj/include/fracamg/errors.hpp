#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracamg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on a scalar argument or configuration was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Vector or matrix sizes do not agree.
class DimensionMismatch : public Error {
public:
    DimensionMismatch(const std::string& what, std::size_t expected, std::size_t got)
        : Error(what + ": expected size " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

/// Fractional order equal to 1/2, where cos(mu*pi) vanishes.
class SingularOrder : public Error {
public:
    using Error::Error;
};

/// Elimination without pivoting hit a zero pivot.
class ZeroPivot : public Error {
public:
    explicit ZeroPivot(std::size_t row)
        : Error("zero pivot in row " + std::to_string(row)), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// An iterative method did not reach its tolerance.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

/// A time step failed; carries the step index.
class StepFailure : public Error {
public:
    StepFailure(std::size_t step, const std::string& why)
        : Error("time step " + std::to_string(step) + " failed: " + why), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace fracamg
