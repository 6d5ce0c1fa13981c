#pragma once

#include <stdexcept>
#include <string>

namespace curvpose {

enum class ErrorCode {
  kBehindCamera,
  kParallel,
  kInsufficientViews,
  kShapeMismatch,
  kNonFiniteObjective,
  kEmptyScene,
  kEmptyMesh,
  kInvalidDimensions,
  kInvalidArgument,
  kPlacementFailed,
  kMalformedFile,
  kValidationError,
  kUnknownVersion,
  kMissingFile,
  kIoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace curvpose
