#include "accspec/error.hpp"

namespace accspec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidLattice: return "invalid-lattice";
    case ErrorCode::kInvalidMask: return "invalid-mask";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInsufficientResolution: return "insufficient-resolution";
    case ErrorCode::kNoFrame: return "no-frame";
    case ErrorCode::kIllConditionedFrame: return "ill-conditioned-frame";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kSizeLimit: return "size-limit";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kDeflatedEigenvalue: return "deflated-eigenvalue";
    case ErrorCode::kTightness: return "tightness";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace accspec
