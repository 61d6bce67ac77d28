#include "pupilscope/error.hpp"

namespace pupilscope {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnreadableFile: return "UNREADABLE_FILE";
    case ErrorCode::UnsupportedFormat: return "UNSUPPORTED_FORMAT";
    case ErrorCode::OutOfBounds: return "OUT_OF_BOUNDS";
    case ErrorCode::RadiusTooSmall: return "RADIUS_TOO_SMALL";
    case ErrorCode::NoValidCandidate: return "NO_VALID_CANDIDATE";
    case ErrorCode::NoPupilContrast: return "NO_PUPIL_CONTRAST";
    case ErrorCode::EmptyRing: return "EMPTY_RING";
    case ErrorCode::BothZero: return "BOTH_ZERO";
    case ErrorCode::MalformedAnnotation: return "MALFORMED_ANNOTATION";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::RegionOutsideFrame: return "REGION_OUTSIDE_FRAME";
    case ErrorCode::DegenerateAnnotation: return "DEGENERATE_ANNOTATION";
    case ErrorCode::TooFewAnnotators: return "TOO_FEW_ANNOTATORS";
    case ErrorCode::InvalidSpec: return "INVALID_SPEC";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

}  // namespace pupilscope
