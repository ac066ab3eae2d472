#include "qbayes/error.hpp"

namespace qbayes {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::NotCP: return "NotCP";
    case ErrorKind::InvalidProblem: return "InvalidProblem";
    case ErrorKind::InvalidTolerance: return "InvalidTolerance";
    case ErrorKind::InternalInconsistency: return "InternalInconsistency";
    case ErrorKind::CornerNotSelfAdjoint: return "CornerNotSelfAdjoint";
    case ErrorKind::NotAPOVM: return "NotAPOVM";
    case ErrorKind::NotAnEnsemble: return "NotAnEnsemble";
    case ErrorKind::NotAResolution: return "NotAResolution";
    case ErrorKind::NotCoisometry: return "NotCoisometry";
    case ErrorKind::PreconditionFailed: return "PreconditionFailed";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NotDeterministic: return "NotDeterministic";
    case ErrorKind::UnknownExample: return "UnknownExample";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<double> witness)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      witness_(witness) {}

}  // namespace qbayes
