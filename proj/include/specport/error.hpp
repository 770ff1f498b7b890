#pragma once

#include <stdexcept>
#include <string>

namespace specport {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, range, ordering).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An augmented vector that must be conjugate-symmetric is not.
class SymmetryError : public Error {
public:
    using Error::Error;
};

/// A covariance could not be factorized (negative eigenvalue beyond tolerance).
class FactorizationError : public Error {
public:
    FactorizationError(const std::string& what, double eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

/// Spectral or classical mean is numerically zero; no return direction exists.
class DegenerateMeanError : public Error {
public:
    using Error::Error;
};

/// Covariance is singular; a positive ridge is required.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Price file could not be read or fails ingestion rules.
class IngestionError : public Error {
public:
    using Error::Error;
};

/// Estimation was asked to run on an empty sample.
class EmptyInputError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace specport
