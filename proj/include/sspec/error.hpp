#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sspec {

enum class ErrorCode {
  kVariantMismatch,
  kWindowTooShort,
  kDimensionMismatch,
  kInvalidArgument,
  kNoUniformSplitting,
  kNotHyperbolic,
  kNonMonotoneProfile,
  kConfig,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sspec
