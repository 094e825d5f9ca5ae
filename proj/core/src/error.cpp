#include "ivfe/error.hpp"

namespace ivfe {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNegativeRange: return "NegativeRange";
    case ErrorCode::kBoundViolation: return "BoundViolation";
    case ErrorCode::kLogDomain: return "LogDomain";
    case ErrorCode::kDegenerateSeries: return "DegenerateSeries";
    case ErrorCode::kOrderTooLarge: return "OrderTooLarge";
    case ErrorCode::kSegmentTooLong: return "SegmentTooLong";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kBinCountTooLarge: return "BinCountTooLarge";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptModel: return "CorruptModel";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

}  // namespace ivfe
