#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nchs {

/// Failure categories raised by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  NotSquare,
  NotPSD,
  NotProjection,
  ModelMismatch,
  DeterminantZero,
  DeltaPhiZero,
  NotStrictlyPositive,
  NotInvertible,
  UnitarityFailure,
  ResidualExceeded,
  NoConvergence,
  ApproximantTooFar,
  InvalidCertificate,
  NonPositiveWeight,
  ParseError,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotProjection: return "NotProjection";
    case ErrorKind::ModelMismatch: return "ModelMismatch";
    case ErrorKind::DeterminantZero: return "DeterminantZero";
    case ErrorKind::DeltaPhiZero: return "DeltaPhiZero";
    case ErrorKind::NotStrictlyPositive: return "NotStrictlyPositive";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::UnitarityFailure: return "UnitarityFailure";
    case ErrorKind::ResidualExceeded: return "ResidualExceeded";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ApproximantTooFar: return "ApproximantTooFar";
    case ErrorKind::InvalidCertificate: return "InvalidCertificate";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace nchs
