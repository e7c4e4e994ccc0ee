// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsindex {

/// Precondition violation (bad surface pair, invalid grid, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solve ran out of grid refinement budget. Carries the best estimates
/// obtained so far so callers can still inspect them.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best)
      : std::runtime_error(what), best_estimates(std::move(best)) {}
  std::vector<double> best_estimates;
};

/// An eigenvalue's certified interval straddles the zero-classification band.
class IndeterminateClassification : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The pointwise-domination hypothesis of an oscillation comparison failed.
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(const std::string& what, double t) : std::runtime_error(what), violation_point(t) {}
  double violation_point;
};

/// Adaptive ODE integration drove the step size below the representable floor.
class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed form and numerics disagree where they are required to agree.
class VerificationFailure : public std::runtime_error {
 public:
  VerificationFailure(const std::string& what, double closed_form, double numeric)
      : std::runtime_error(what), closed_form(closed_form), numeric(numeric) {}
  double closed_form;
  double numeric;
};

}  // namespace fsindex
