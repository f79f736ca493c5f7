#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semipso {

enum class ErrorCode {
  kShapeMismatch,
  kInvalidArgument,
  kInvalidConfig,
  kNonScalarRoot,
  kSingleClassLabels,
  kNoPositiveLabels,
  kBadMagic,
  kMalformedHeader,
  kTruncatedPayload,
  kIoFailure,
  kBadCheckpoint,
  kTrainingDiverged,
  kMissingMasks,
};

/// Stable lower-case identifier used in CLI error lines, e.g. "shape_mismatch".
std::string_view error_code_name(ErrorCode code) noexcept;

/// The single exception type thrown by the library. The code lets callers
/// branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the training loop when a loss becomes non-finite.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(long iteration, const std::string& message)
      : Error(ErrorCode::kTrainingDiverged, message), iteration_(iteration) {}

  [[nodiscard]] long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace semipso
