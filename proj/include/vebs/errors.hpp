#pragma once

#include <stdexcept>
#include <string>

namespace vebs {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid run configuration (sizes, flags, presets).
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The discrete problem cannot be solved as posed, e.g. a step matrix
/// that is not positive definite.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation point outside the computational domain.
class OutOfDomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

} // namespace vebs
