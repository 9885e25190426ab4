// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace apdcorr {

/// Input outside the domain of an operation (negative rate, empty feasible set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition of an operation does not hold for the given data.
class PreconditionError : public DomainError {
 public:
  PreconditionError(const std::string& what, double measured)
      : DomainError(what), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

/// Iteration failed to converge or produced a non-finite intermediate.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apdcorr
