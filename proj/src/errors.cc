#include "curvpose/errors.h"

namespace curvpose {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kParallel: return "Parallel";
    case ErrorCode::kInsufficientViews: return "InsufficientViews";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kEmptyMesh: return "EmptyMesh";
    case ErrorCode::kInvalidDimensions: return "InvalidDimensions";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kPlacementFailed: return "PlacementFailed";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kUnknownVersion: return "UnknownVersion";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace curvpose
