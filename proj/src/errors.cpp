#include "repp/errors.hpp"

namespace repp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainEscape: return "DomainEscape";
    case ErrorCode::NearSingularity: return "NearSingularity";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotRepelling: return "NotRepelling";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::LinearizationBreakdown: return "LinearizationBreakdown";
    case ErrorCode::DepthOverflow: return "DepthOverflow";
    case ErrorCode::MissingPotential: return "MissingPotential";
    case ErrorCode::TailUnavailable: return "TailUnavailable";
    case ErrorCode::WindowBeyondHorizon: return "WindowBeyondHorizon";
    case ErrorCode::TooFewClusters: return "TooFewClusters";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::SizeZero: return "SizeZero";
    case ErrorCode::DegenerateEvent: return "DegenerateEvent";
    case ErrorCode::ReturnCapExceeded: return "ReturnCapExceeded";
    case ErrorCode::MismatchedTau: return "MismatchedTau";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingTable: return "MissingTable";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace repp
