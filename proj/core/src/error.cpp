#include "esdiv/error.hpp"

namespace esdiv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DuplicateProblemId: return "DuplicateProblemId";
    case ErrorCode::InsufficientTests: return "InsufficientTests";
    case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorCode::UnknownProblemId: return "UnknownProblemId";
    case ErrorCode::SetTooSmall: return "SetTooSmall";
    case ErrorCode::RunnerUnavailable: return "RunnerUnavailable";
    case ErrorCode::DepthLimitExceeded: return "DepthLimitExceeded";
    case ErrorCode::ProblemMismatch: return "ProblemMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::MalformedJudgeReply: return "MalformedJudgeReply";
    case ErrorCode::HeterogeneousScores: return "HeterogeneousScores";
    case ErrorCode::NonpositiveParams: return "NonpositiveParams";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::PairingFailure: return "PairingFailure";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::MissingModelMetadata: return "MissingModelMetadata";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace esdiv
