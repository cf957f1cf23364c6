#pragma once

#include <stdexcept>
#include <string>

namespace momentlab {

/// Invalid input detected before any computation: bad indices, malformed
/// configuration, times outside a profile's domain.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A numerical guard tripped during computation. The message names the guard.
class NumericalGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepSizeError : public NumericalGuardError {
public:
    using NumericalGuardError::NumericalGuardError;
};

class SingularityError : public NumericalGuardError {
public:
    using NumericalGuardError::NumericalGuardError;
};

class SingularMatrixError : public NumericalGuardError {
public:
    SingularMatrixError(const std::string& what, double condition)
        : NumericalGuardError(what), condition_(condition) {}
    double condition_number() const noexcept { return condition_; }

private:
    double condition_;
};

class UntrustedResultError : public NumericalGuardError {
public:
    using NumericalGuardError::NumericalGuardError;
};

} // namespace momentlab
