#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncentre {

enum class ErrorCode {
  invalid_argument,
  distance_zero,
  pole_coincidence,
  segment_through_pole,
  non_integer_residual,
  class_violation_at_start,
  outside_hill_region,
  non_positive_omega,
  alpha_out_of_range,
  insufficient_data,
  alpha_mismatch,
  branch_discontinuity,
  step_underflow,
  invalid_config,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI error JSON) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ncentre
