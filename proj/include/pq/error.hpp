#pragma once

#include <stdexcept>
#include <string>

namespace pq {

enum class ErrorCode {
  DimensionMismatch,
  UnknownLabel,
  NotALattice,
  NotAPartialOrder,
  CyclicRelation,
  ImproperCone,
  UnnormalizedDistribution,
  UnsupportedPoint,
  TauOutOfRange,
  EmptyCandidateSet,
  ZeroComparability,
  GridMismatch,
  GridEmpty,
  NotNondecreasing,
  NotInBody,
  InfeasiblePbar,
  OracleFailure,
  NoSampler,
  InvalidArgument,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Numeric failures (solver infeasibility, oracle breakdown) as opposed to
/// bad input data. The CLI maps this to its exit status.
bool is_numeric_failure(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pq
