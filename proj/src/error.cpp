#include "pq/error.hpp"

namespace pq {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NotALattice: return "NotALattice";
    case ErrorCode::NotAPartialOrder: return "NotAPartialOrder";
    case ErrorCode::CyclicRelation: return "CyclicRelation";
    case ErrorCode::ImproperCone: return "ImproperCone";
    case ErrorCode::UnnormalizedDistribution: return "UnnormalizedDistribution";
    case ErrorCode::UnsupportedPoint: return "UnsupportedPoint";
    case ErrorCode::TauOutOfRange: return "TauOutOfRange";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::ZeroComparability: return "ZeroComparability";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GridEmpty: return "GridEmpty";
    case ErrorCode::NotNondecreasing: return "NotNondecreasing";
    case ErrorCode::NotInBody: return "NotInBody";
    case ErrorCode::InfeasiblePbar: return "InfeasiblePbar";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::NoSampler: return "NoSampler";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_numeric_failure(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InfeasiblePbar:
    case ErrorCode::OracleFailure:
    case ErrorCode::NotInBody:
    case ErrorCode::ZeroComparability:
    case ErrorCode::EmptyCandidateSet:
      return true;
    default:
      return false;
  }
}

}  // namespace pq
