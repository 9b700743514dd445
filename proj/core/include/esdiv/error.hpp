#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace esdiv {

enum class ErrorCode {
  MalformedRecord,
  DuplicateProblemId,
  InsufficientTests,
  MissingPlaceholder,
  UnknownProblemId,
  SetTooSmall,
  RunnerUnavailable,
  DepthLimitExceeded,
  ProblemMismatch,
  DimensionMismatch,
  ZeroVector,
  JudgeUnavailable,
  MalformedJudgeReply,
  HeterogeneousScores,
  NonpositiveParams,
  TooFewPairs,
  AllZeroDifferences,
  ZeroVariance,
  PairingFailure,
  InvalidDistribution,
  MissingModelMetadata,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for every contract violation in the library.
/// Scored outcomes (extraction failure, unparseable source) are values, not errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace esdiv
