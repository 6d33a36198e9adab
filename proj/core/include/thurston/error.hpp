#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thurston {

enum class ErrorCode {
  ParseError,
  UnsupportedPortrait,
  UntaggedInfiniteTail,
  InconsistentTag,
  NotStable,
  NewtonDivergence,
  DegenerateConfiguration,
  BranchCollision,
  RootFindingFailure,
  LabelMismatch,
  EvaluationFailure,
  PoleSeparationTooSmall,
  ContourQuadratureNonConvergent,
  QuadratureBudgetExceeded,
  PoleInsideAnnulus,
  NoAnnulusFound,
  MultiplierMismatch,
  NonConvergence,
  NoAdmissibleRadius,
  AuditPreconditionFailed,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace thurston
