#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pupilscope {

enum class ErrorCode {
  UnreadableFile,
  UnsupportedFormat,
  OutOfBounds,
  RadiusTooSmall,
  NoValidCandidate,
  NoPupilContrast,
  EmptyRing,
  BothZero,
  MalformedAnnotation,
  EmptyDataset,
  RegionOutsideFrame,
  DegenerateAnnotation,
  TooFewAnnotators,
  InvalidSpec,
  IoError,
  InvalidArgument,
};

/// Stable upper-snake identifier, used verbatim in CLI error lines.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pupilscope
