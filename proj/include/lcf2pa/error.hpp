#pragma once

#include <stdexcept>
#include <string>

namespace lcf2pa {

/// Base of all library errors. The CLI maps `ConfigError`/`DataError`/`DomainError`
/// to exit code 2 and `NumericalError` to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing, malformed or mutually inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be processed (shape mismatch, non-positive values, too few points).
class DataError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Wavelength outside the fitted range of a dispersion formula.
class RangeError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Core index does not exceed cladding index; no guided modes.
class GuidanceError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Operation invoked for the wrong excitation kind (laser vs photon pairs).
class WrongModelError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Fit failed to converge, quadrature failed, or a grid cannot resolve the result.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Temporal window too short for the dispersed pair; the spectrum grid needs finer sampling.
class ResolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace lcf2pa
