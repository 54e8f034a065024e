#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace subtherm {

enum class ErrorKind {
  InvalidArgument,
  InadmissibleWord,
  InadmissibleJunction,
  NotPeriodic,
  TrivialHomoclinic,
  SingularMatrix,
  DimensionMismatch,
  OutOfRange,
  NotPrimitive,
  InconclusiveNumerics,
  MissingCertificate,
  NoConnector,
  BudgetExceeded,
  NotStablyRelated,
  NotUnstablyRelated,
  LineNotInvariant,
  StructuralFailure,
  SchemaError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InadmissibleWord: return "InadmissibleWord";
    case ErrorKind::InadmissibleJunction: return "InadmissibleJunction";
    case ErrorKind::NotPeriodic: return "NotPeriodic";
    case ErrorKind::TrivialHomoclinic: return "TrivialHomoclinic";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotPrimitive: return "NotPrimitive";
    case ErrorKind::InconclusiveNumerics: return "InconclusiveNumerics";
    case ErrorKind::MissingCertificate: return "MissingCertificate";
    case ErrorKind::NoConnector: return "NoConnector";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotStablyRelated: return "NotStablyRelated";
    case ErrorKind::NotUnstablyRelated: return "NotUnstablyRelated";
    case ErrorKind::LineNotInvariant: return "LineNotInvariant";
    case ErrorKind::StructuralFailure: return "StructuralFailure";
    case ErrorKind::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace subtherm
