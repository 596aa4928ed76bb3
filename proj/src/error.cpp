#include "coloc/error.hpp"

namespace coloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kInconsistentData: return "inconsistent-data";
    case ErrorCode::kUndefinedYaw: return "undefined-yaw";
    case ErrorCode::kUndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::kMalformedFrame: return "malformed-frame";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kRegistration: return "registration";
  }
  return "unknown";
}

}  // namespace coloc
