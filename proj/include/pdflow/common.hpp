#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument dimensions or preconditions do not match the contract of the call.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// A state invariant was found broken (e.g. a negative multiplier).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// A value oracle (objective or constraint) failed to evaluate.
class EvaluationError : public Error {
public:
    using Error::Error;
};

class InfeasibleProblem : public Error {
public:
    using Error::Error;
};

/// The request exceeds what the routine supports (e.g. enumeration bound).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// An index entered and left the active set inside a single step.
class StepTooLarge : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

inline void require_size(const Vector& v, Eigen::Index expected, const char* what) {
    if (v.size() != expected) {
        throw ContractViolation(std::string(what) + ": expected length " + std::to_string(expected) +
                                ", got " + std::to_string(v.size()));
    }
}

[[nodiscard]] inline double max_norm(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace pdflow
