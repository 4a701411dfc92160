#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jdist {

enum class ErrorKind {
  NotPrime,
  ReducibleModulus,
  FieldTooLarge,
  ZeroInverse,
  ZeroArgument,
  BudgetExceeded,
  TrivialCharacterInTuple,
  TrivialProduct,
  SOutOfRange,
  DomainError,
  InvalidArgument,
  ConfigError,
  InvariantViolation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::ReducibleModulus: return "ReducibleModulus";
    case ErrorKind::FieldTooLarge: return "FieldTooLarge";
    case ErrorKind::ZeroInverse: return "ZeroInverse";
    case ErrorKind::ZeroArgument: return "ZeroArgument";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::TrivialCharacterInTuple: return "TrivialCharacterInTuple";
    case ErrorKind::TrivialProduct: return "TrivialProduct";
    case ErrorKind::SOutOfRange: return "SOutOfRange";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// All library failures are reported as `Error`; `kind()` identifies the
/// failure class so callers (the CLI in particular) can map it to an exit
/// status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit status for a failure class: 1 validation, 2 invariant
/// violation, 3 budget exceeded.
constexpr int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvariantViolation: return 2;
    case ErrorKind::BudgetExceeded: return 3;
    default: return 1;
  }
}

}  // namespace jdist
