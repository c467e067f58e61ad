#pragma once

#include <stdexcept>
#include <string>

namespace dyntrack {

/// Raised when a runtime invariant of the model breaks (non-primitive
/// combination matrix, push-sum weight underflow, ...). `invariant()` names
/// the violated property so drivers can report it.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace dyntrack
