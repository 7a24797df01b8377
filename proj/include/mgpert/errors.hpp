#pragma once

#include <stdexcept>
#include <string>

namespace mgpert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input violates a documented type invariant (bad sign, out of range, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// |1 + sqrt(2) gamma / (sigma xi0)| is too small (C1 denominator vanishes),
/// or the derived constants are not finite.
class DegenerateParams : public Error {
public:
    using Error::Error;
};

class NonpositiveVariance : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Price outside the no-arbitrage bracket of the implied-vol solver.
class OutOfBounds : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class QuadratureNotConverged : public NoConvergence {
public:
    using NoConvergence::NoConvergence;
};

class EmptyQuoteSet : public ValidationError {
public:
    using ValidationError::ValidationError;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace detail

}  // namespace mgpert
