/**
 * @file error.hpp
 * @brief Exception types raised by the pidoc library.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace pidoc {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two arrays that must be paired element-wise have different lengths.
class LengthMismatch : public Error {
 public:
  LengthMismatch(const std::string& what, std::size_t lhs, std::size_t rhs)
      : Error(what + ": length mismatch (" + std::to_string(lhs) + " vs " + std::to_string(rhs) + ")") {}
};

/// A configuration value violates its invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could no longer make progress in time.
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(double t, double h)
      : Error("step size underflow at t=" + std::to_string(t) + " (h=" + std::to_string(h) + ")") {}
};

/// Every sample was excluded by the near-zero mask of the relative error.
class AllPointsMasked : public Error {
 public:
  using Error::Error;
};

/// A statistic over an iteration history was requested for an empty history.
class EmptyHistory : public Error {
 public:
  using Error::Error;
};

/// The objective returned a non-finite value or gradient at the starting point.
class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

}  // namespace pidoc
