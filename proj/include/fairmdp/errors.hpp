#pragma once

#include <stdexcept>
#include <string>

namespace fairmdp {

/// Bad inputs: dimension mismatches, malformed files, broken invariants.
/// The message names the offending field/index where applicable.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A group with zero probability mass (or zero rollouts) where a
/// group-conditioned quantity was requested.
class EmptyGroupError : public ValidationError {
public:
    explicit EmptyGroupError(const std::string& what) : ValidationError(what) {}
};

/// Numerical breakdown: simplex pivot collapse, non-ergodic chains, etc.
/// Distinct from Infeasible/Unbounded, which are statuses, not failures.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fairmdp
