#include "ncentre/errors.hpp"

namespace ncentre {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::distance_zero: return "DistanceZero";
    case ErrorCode::pole_coincidence: return "PoleCoincidence";
    case ErrorCode::segment_through_pole: return "SegmentThroughPole";
    case ErrorCode::non_integer_residual: return "NonIntegerResidual";
    case ErrorCode::class_violation_at_start: return "ClassViolationAtStart";
    case ErrorCode::outside_hill_region: return "OutsideHillRegion";
    case ErrorCode::non_positive_omega: return "NonPositiveOmega";
    case ErrorCode::alpha_out_of_range: return "AlphaOutOfRange";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::alpha_mismatch: return "AlphaMismatch";
    case ErrorCode::branch_discontinuity: return "BranchDiscontinuity";
    case ErrorCode::step_underflow: return "StepUnderflow";
    case ErrorCode::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace ncentre
