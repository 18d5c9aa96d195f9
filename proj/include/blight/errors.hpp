#pragma once

#include <stdexcept>
#include <string>

namespace blight {

/// Precondition or argument-domain violation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A recorded state left the admissible region (negativity, conservation,
/// a-priori bounds) beyond tolerance.
class InstabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared in the solution.
class BlowUpError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An experiment could not produce a trustworthy result and was stopped.
class ExperimentAborted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace blight
