#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace qbayes {

enum class ErrorKind {
  NotSquare,
  NotHermitian,
  NoConvergence,
  NotPSD,
  DimensionMismatch,
  NotUnitary,
  InvalidSplit,
  NotCP,
  InvalidProblem,
  InvalidTolerance,
  InternalInconsistency,
  CornerNotSelfAdjoint,
  NotAPOVM,
  NotAnEnsemble,
  NotAResolution,
  NotCoisometry,
  PreconditionFailed,
  NotStochastic,
  NotDeterministic,
  UnknownExample,
  ParseError,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library. `witness` carries the offending
// magnitude when one exists (asymmetry, eigenvalue, residual).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<double> witness = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<double> witness() const noexcept { return witness_; }

 private:
  ErrorKind kind_;
  std::optional<double> witness_;
};

}  // namespace qbayes
