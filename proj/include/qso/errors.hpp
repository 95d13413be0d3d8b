#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qso {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition (bad parameters, empty
/// samples, malformed grids). The CLI maps this family to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidInput : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The Chebyshev budget needs a finite-variance kernel.
class BudgetInapplicable : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Exact drawing would need more primitive draws than the guard allows.
class FeasibilityError : public ValidationError {
public:
    FeasibilityError(const std::string& what, double estimated_draws)
        : ValidationError(what), estimated_draws_(estimated_draws) {}

    double estimated_draws() const noexcept { return estimated_draws_; }

private:
    double estimated_draws_;
};

/// A numerical procedure did not reach its accuracy target. Maps to exit 3.
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class NonConvergence : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

}  // namespace qso
