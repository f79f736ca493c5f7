#include "semipso/error.hpp"

namespace semipso {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kNonScalarRoot: return "non_scalar_root";
    case ErrorCode::kSingleClassLabels: return "single_class_labels";
    case ErrorCode::kNoPositiveLabels: return "no_positive_labels";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kTruncatedPayload: return "truncated_payload";
    case ErrorCode::kIoFailure: return "io_failure";
    case ErrorCode::kBadCheckpoint: return "bad_checkpoint";
    case ErrorCode::kTrainingDiverged: return "training_diverged";
    case ErrorCode::kMissingMasks: return "missing_masks";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace semipso
