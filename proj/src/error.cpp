#include "sspec/error.hpp"

namespace sspec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kVariantMismatch: return "variant_mismatch";
    case ErrorCode::kWindowTooShort: return "window_too_short";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNoUniformSplitting: return "no_uniform_splitting";
    case ErrorCode::kNotHyperbolic: return "not_hyperbolic";
    case ErrorCode::kNonMonotoneProfile: return "non_monotone_profile";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace sspec
