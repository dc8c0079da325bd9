#pragma once

#include <stdexcept>
#include <string>

namespace genfrac {

// Base class for every numerical failure raised by the library. The CLI maps
// these to exit code 1; anything else escaping is a bug.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "numeric_error"; }
};

// Argument outside the mathematical domain of an operation (p <= 0, t <= 0, ...).
class DomainError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "domain_error"; }
};

// Complex argument on the cut (-inf, 0], or a family without analytic continuation.
class BranchError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "branch_error"; }
};

class InversionError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "inversion_error"; }
};

// Caller broke a documented precondition (abscissa left of a singularity, ...).
class ContractViolation : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "contract_violation"; }
};

// Root bracket could not be established inside the admissible search range.
class RangeError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "range_error"; }
};

// The tail of an s-integral cannot be bounded on the available range.
class IntegrabilityError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "integrability_error"; }
};

// Hypothesis of the growing-regime asymptotics is not met.
class PreconditionError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "precondition_error"; }
};

class FitError : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "fit_error"; }
};

class GridRejected : public NumericError {
public:
    using NumericError::NumericError;
    const char* kind() const noexcept override { return "grid_rejected"; }
};

} // namespace genfrac
