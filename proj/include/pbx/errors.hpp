#pragma once

#include <stdexcept>
#include <string>

namespace pbx {

/// Raised when an argument lies outside the domain of an operation
/// (a probability outside [0,1], mismatched lengths, inconsistent block sizes).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class InfeasibleReason {
  /// The targets violate a necessary condition, so the feasible set is empty.
  EmptyFeasibleSet,
  /// No enumerated structure admitted a root within the residual tolerance.
  NoStructureAdmissible,
};

inline const char* to_string(InfeasibleReason reason) {
  switch (reason) {
    case InfeasibleReason::EmptyFeasibleSet:
      return "empty feasible set";
    case InfeasibleReason::NoStructureAdmissible:
      return "no structure admissible";
  }
  return "unknown";
}

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(InfeasibleReason reason, std::string detail, long structures_examined = 0)
      : std::runtime_error(std::string(to_string(reason)) + ": " + detail),
        reason_(reason),
        detail_(std::move(detail)),
        structures_examined_(structures_examined) {}

  InfeasibleReason reason() const { return reason_; }
  const std::string& detail() const { return detail_; }
  long structures_examined() const { return structures_examined_; }

 private:
  InfeasibleReason reason_;
  std::string detail_;
  long structures_examined_;
};

}  // namespace pbx
