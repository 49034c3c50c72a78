#include "paththresh/errors.hpp"

namespace paththresh {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NonConverged: return "NonConverged";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EpsilonInfeasible: return "EpsilonInfeasible";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::ZeroResidual: return "ZeroResidual";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace paththresh
