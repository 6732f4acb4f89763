#pragma once

#include <stdexcept>
#include <string>

namespace nescape {

// Base class for all errors thrown by the library. Catching nescape::Error is
// sufficient to intercept every failure mode; the subclasses exist so callers
// can distinguish bad input from numerical breakdown.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A caller-supplied value violates a documented precondition.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

// An iteration exhausted its budget without meeting its tolerance.
class NonConvergenceError : public Error {
public:
  using Error::Error;
};

// |grad F| fell below tolerance where a surface normal was required.
class DegenerateGradientError : public Error {
public:
  using Error::Error;
};

// Newton projection onto the boundary failed to converge.
class ProjectionFailureError : public NonConvergenceError {
public:
  using NonConvergenceError::NonConvergenceError;
};

// Adaptive quadrature could not reach its target within the refinement budget.
class QuadratureFailureError : public NonConvergenceError {
public:
  using NonConvergenceError::NonConvergenceError;
};

// A linear system was solvable but with an unacceptable condition estimate.
class IllConditionedError : public Error {
public:
  using Error::Error;
};

// A pivot vanished during elimination; the system has no unique solution.
class SingularMatrixError : public Error {
public:
  using Error::Error;
};

// Parameters are outside the regime where the requested approximation holds.
class RegimeError : public InvalidInputError {
public:
  using InvalidInputError::InvalidInputError;
};

// Too few absorbed trajectories to estimate the requested statistic.
class TooFewSurvivorsError : public Error {
public:
  using Error::Error;
};

// The survival-curve fit window starts before the slowest mode dominates.
class ModeMixingError : public Error {
public:
  using Error::Error;
};

// Two simulation configs that must agree (e.g. for extrapolation) do not.
class InconsistentConfigsError : public InvalidInputError {
public:
  using InvalidInputError::InvalidInputError;
};

// A file or string being parsed does not match its declared format.
class FormatError : public InvalidInputError {
public:
  using InvalidInputError::InvalidInputError;
};

} // namespace nescape
