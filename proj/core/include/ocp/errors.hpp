#pragma once

#include <stdexcept>
#include <string>

namespace ocp {

/// A precondition on an argument was not met (dimension mismatch, p outside (0,1), ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An exact enumeration would exceed its configured work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity the caller asked for is infinite almost surely (e.g. r_d for d = 1).
class DivergenceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bisection bracket does not straddle the survival threshold.
class BracketError : public std::runtime_error {
 public:
  BracketError(const std::string& what, double survival_lo, double survival_hi)
      : std::runtime_error(what), survival_lo_(survival_lo), survival_hi_(survival_hi) {}

  double survival_lo() const noexcept { return survival_lo_; }
  double survival_hi() const noexcept { return survival_hi_; }

 private:
  double survival_lo_;
  double survival_hi_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace ocp
