#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace accspec {

enum class ErrorCode {
  kInvalidLattice,
  kInvalidMask,
  kInvalidArgument,
  kInsufficientResolution,
  kNoFrame,
  kIllConditionedFrame,
  kDivergence,
  kEmptyMask,
  kSizeLimit,
  kNumerical,
  kDeflatedEigenvalue,
  kTightness,
  kConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to a report entry without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace accspec
