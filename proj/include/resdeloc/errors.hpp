#pragma once

#include <stdexcept>
#include <string>

namespace resdeloc {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Evaluation point coincides with a pole.
struct PoleError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateSampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by root solvers when monotone bracketing fails to converge.
// Never expected in practice; treat as an internal bug signal.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SizeError : std::length_error {
    using std::length_error::length_error;
};

struct EmptyInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InsufficientEnsembleError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RegimeError : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace resdeloc
