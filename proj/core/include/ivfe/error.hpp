#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ivfe {

enum class ErrorCode {
  kInvalidArgument,
  kNegativeRange,
  kBoundViolation,
  kLogDomain,
  kDegenerateSeries,
  kOrderTooLarge,
  kSegmentTooLong,
  kParseError,
  kBinCountTooLarge,
  kShapeMismatch,
  kInsufficientData,
  kVersionMismatch,
  kCorruptModel,
  kDimensionMismatch,
  kSingularSystem,
  kZeroDenominator,
  kLengthMismatch,
  kConfigError,
  kIoError,
};

/// Stable name of an error code, e.g. "NegativeRange".
std::string_view error_name(ErrorCode code) noexcept;

/// The single exception type thrown by the library. `what()` is prefixed
/// with the error name so messages are self-describing on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ivfe
